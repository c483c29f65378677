#pragma once

#include <cstdint>

#include "adaptgen/data.hpp"

namespace adaptgen {

// Deterministic synthetic table-to-text domain: person tables (name,
// occupation, birthplace) with templated references, and an unlabeled corpus
// whose sentences share entities with the tables plus distractors drawn from
// other tables. Used by smoke tests, the acceptance suite, and the ablation
// script.
struct SynthConfig {
  int n_tables = 30;
  int distractors_per_table = 2;
  std::uint64_t seed = 1;
};

struct SynthData {
  Dataset dataset;
  PrototypeCorpus corpus;
};

SynthData make_synthetic_domain(const SynthConfig& cfg);

// Writers for the on-disk formats the loaders read back.
void save_dataset(const Dataset& dataset, const std::string& path);
void save_corpus(const PrototypeCorpus& corpus, const std::string& path);

}  // namespace adaptgen
