#pragma once

#include <string>
#include <vector>

#include "adaptgen/data.hpp"

namespace adaptgen {

struct MetricReport {
  double bleu4 = 0.0;  // [0, 100]
  double rouge4_precision = 0.0;
  double rouge4_recall = 0.0;
  double rouge4_f1 = 0.0;
  double parent_precision = 0.0;
  double parent_recall = 0.0;
  double parent_f1 = 0.0;
  std::size_t n_examples = 0;
};

struct ParentConfig {
  // Mixing weight between reference recall and table-grounding recall in the
  // geometric combination; conventions follow the metric's source work.
  double lambda = 0.5;
  int max_ngram = 4;
};

double harmonic_mean(double precision, double recall);

// Corpus BLEU: modified n-gram precision for n=1..4, geometric mean, brevity
// penalty, scaled to [0, 100]. No smoothing.
double bleu4(const std::vector<std::string>& hypotheses,
             const std::vector<std::string>& references);

// Corpus-level clipped 4-gram overlap.
struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};
PRF rouge4(const std::vector<std::string>& hypotheses,
           const std::vector<std::string>& references);

// Word-overlap PARENT: precision credits n-grams entailed by table values or
// present in the reference; recall geometrically combines reference recall
// with the table-grounding of the hypothesis. Corpus values are means of
// per-example precision/recall, with F1 their harmonic mean.
PRF parent_f(const std::vector<std::string>& hypotheses,
             const std::vector<std::string>& references, const std::vector<Table>& tables,
             const ParentConfig& cfg = {});
PRF parent_example(const std::string& hypothesis, const std::string& reference, const Table& t,
                   const ParentConfig& cfg = {});

// Automated stand-in for the #Sup/#Cont fact counts: supported counts table
// values appearing verbatim (token-wise) in the hypothesis; contradicted
// counts attributes whose value is only partially mentioned.
struct EntityOverlap {
  int supported = 0;
  int contradicted = 0;
};
EntityOverlap entity_overlap_report(const std::string& hypothesis, const Table& t);

MetricReport evaluate_all(const std::vector<std::string>& hypotheses,
                          const std::vector<std::string>& references,
                          const std::vector<Table>& tables, const ParentConfig& cfg = {});

}  // namespace adaptgen
