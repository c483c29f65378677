#include "adaptgen/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "adaptgen/tokenizer.hpp"

namespace adaptgen {

namespace {

std::vector<std::string> metric_tokens(const std::string& text) {
  return tokenize(lowercase(text));
}

using NgramCounts = std::map<std::string, std::size_t>;

std::string ngram_key(const std::vector<std::string>& toks, std::size_t start, std::size_t n) {
  std::string key;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) key += '\x1f';
    key += toks[start + i];
  }
  return key;
}

NgramCounts count_ngrams(const std::vector<std::string>& toks, std::size_t n) {
  NgramCounts counts;
  if (toks.size() >= n) {
    for (std::size_t i = 0; i + n <= toks.size(); ++i) ++counts[ngram_key(toks, i, n)];
  }
  return counts;
}

bool contains_subsequence(const std::vector<std::string>& haystack,
                          const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + static_cast<long>(i))) {
      return true;
    }
  }
  return false;
}

bool is_content_token(const std::string& tok) {
  return std::any_of(tok.begin(), tok.end(),
                     [](unsigned char c) { return std::isalnum(c) != 0; });
}

void check_corpus(std::size_t n_hyp, std::size_t n_ref) {
  if (n_hyp == 0) throw std::runtime_error("empty evaluation corpus");
  if (n_hyp != n_ref) {
    throw std::runtime_error("hypothesis/reference count mismatch: " + std::to_string(n_hyp) +
                             " vs " + std::to_string(n_ref));
  }
}

}  // namespace

double harmonic_mean(double precision, double recall) {
  if (precision <= 0.0 && recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double bleu4(const std::vector<std::string>& hypotheses,
             const std::vector<std::string>& references) {
  check_corpus(hypotheses.size(), references.size());
  constexpr std::size_t kMaxN = 4;
  std::size_t matched[kMaxN] = {0, 0, 0, 0};
  std::size_t total[kMaxN] = {0, 0, 0, 0};
  std::size_t hyp_len = 0, ref_len = 0;

  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto hyp = metric_tokens(hypotheses[i]);
    const auto ref = metric_tokens(references[i]);
    hyp_len += hyp.size();
    ref_len += ref.size();
    for (std::size_t n = 1; n <= kMaxN; ++n) {
      const NgramCounts hc = count_ngrams(hyp, n);
      const NgramCounts rc = count_ngrams(ref, n);
      for (const auto& [g, c] : hc) {
        total[n - 1] += c;
        auto it = rc.find(g);
        if (it != rc.end()) matched[n - 1] += std::min(c, it->second);
      }
    }
  }

  double log_sum = 0.0;
  for (std::size_t n = 0; n < kMaxN; ++n) {
    if (total[n] == 0 || matched[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched[n]) / static_cast<double>(total[n]));
  }
  if (hyp_len == 0) return 0.0;
  const double bp = hyp_len >= ref_len
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
  return 100.0 * bp * std::exp(log_sum / static_cast<double>(kMaxN));
}

PRF rouge4(const std::vector<std::string>& hypotheses,
           const std::vector<std::string>& references) {
  check_corpus(hypotheses.size(), references.size());
  constexpr std::size_t kN = 4;
  std::size_t overlap = 0, hyp_total = 0, ref_total = 0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const NgramCounts hc = count_ngrams(metric_tokens(hypotheses[i]), kN);
    const NgramCounts rc = count_ngrams(metric_tokens(references[i]), kN);
    for (const auto& [g, c] : hc) {
      hyp_total += c;
      auto it = rc.find(g);
      if (it != rc.end()) overlap += std::min(c, it->second);
    }
    for (const auto& [g, c] : rc) ref_total += c;
  }
  PRF out;
  out.precision = hyp_total == 0 ? 0.0 : static_cast<double>(overlap) / static_cast<double>(hyp_total);
  out.recall = ref_total == 0 ? 0.0 : static_cast<double>(overlap) / static_cast<double>(ref_total);
  out.f1 = harmonic_mean(out.precision, out.recall);
  return out;
}

PRF parent_example(const std::string& hypothesis, const std::string& reference, const Table& t,
                   const ParentConfig& cfg) {
  const auto hyp = metric_tokens(hypothesis);
  const auto ref = metric_tokens(reference);
  if (hyp.empty()) return PRF{0.0, 0.0, 0.0};

  std::set<std::string> table_words;
  bool table_has_tokens = false;
  for (const auto& p : t.pairs) {
    for (const auto& tok : metric_tokens(p.value)) {
      table_words.insert(tok);
      table_has_tokens = true;
    }
  }
  auto entailed = [&](const std::string& w) { return table_words.count(w) != 0; };

  // Precision: n-grams present in the reference get full credit; the rest are
  // credited by the fraction of their tokens entailed by the table.
  double log_prec = 0.0;
  std::size_t prec_orders = 0;
  bool prec_zero = false;
  for (std::size_t n = 1; n <= static_cast<std::size_t>(cfg.max_ngram) && n <= hyp.size(); ++n) {
    const NgramCounts rc = count_ngrams(ref, n);
    double credit = 0.0;
    std::size_t total = 0;
    for (std::size_t i = 0; i + n <= hyp.size(); ++i) ++total;
    NgramCounts hc = count_ngrams(hyp, n);
    for (const auto& [g, c] : hc) {
      auto it = rc.find(g);
      const std::size_t in_ref = it == rc.end() ? 0 : std::min(c, it->second);
      std::size_t entailed_tokens = 0;
      {
        std::size_t start = 0;
        for (std::size_t k = 0; k < n; ++k) {
          const std::size_t sep = g.find('\x1f', start);
          const std::string w = g.substr(start, (sep == std::string::npos ? g.size() : sep) - start);
          if (entailed(w)) ++entailed_tokens;
          start = sep == std::string::npos ? g.size() : sep + 1;
        }
      }
      const double frac = static_cast<double>(entailed_tokens) / static_cast<double>(n);
      credit += static_cast<double>(in_ref) + static_cast<double>(c - in_ref) * frac;
    }
    const double p_n = credit / static_cast<double>(total);
    if (p_n <= 0.0) {
      prec_zero = true;
      break;
    }
    log_prec += std::log(p_n);
    ++prec_orders;
  }
  const double precision = (prec_zero || prec_orders == 0)
                               ? 0.0
                               : std::exp(log_prec / static_cast<double>(prec_orders));

  // Reference recall: clipped n-gram recall of the reference by the
  // hypothesis, geometric over orders.
  double log_rr = 0.0;
  std::size_t rr_orders = 0;
  bool rr_zero = false;
  for (std::size_t n = 1; n <= static_cast<std::size_t>(cfg.max_ngram) && n <= ref.size(); ++n) {
    const NgramCounts hc = count_ngrams(hyp, n);
    const NgramCounts rc = count_ngrams(ref, n);
    std::size_t match = 0, total = 0;
    for (const auto& [g, c] : rc) {
      total += c;
      auto it = hc.find(g);
      if (it != hc.end()) match += std::min(c, it->second);
    }
    const double r_n = static_cast<double>(match) / static_cast<double>(total);
    if (r_n <= 0.0) {
      rr_zero = true;
      break;
    }
    log_rr += std::log(r_n);
    ++rr_orders;
  }
  const double recall_ref =
      (rr_zero || rr_orders == 0) ? 0.0 : std::exp(log_rr / static_cast<double>(rr_orders));

  // Table-grounding recall: fraction of hypothesis tokens entailed by the
  // table; an empty table has no claims to cover.
  double recall_tab = 1.0;
  if (table_has_tokens) {
    std::size_t n_ent = 0;
    for (const auto& w : hyp) n_ent += entailed(w) ? 1 : 0;
    recall_tab = static_cast<double>(n_ent) / static_cast<double>(hyp.size());
  }

  PRF out;
  out.precision = precision;
  out.recall = (recall_ref <= 0.0 || recall_tab <= 0.0)
                   ? 0.0
                   : std::pow(recall_ref, 1.0 - cfg.lambda) * std::pow(recall_tab, cfg.lambda);
  out.f1 = harmonic_mean(out.precision, out.recall);
  return out;
}

PRF parent_f(const std::vector<std::string>& hypotheses,
             const std::vector<std::string>& references, const std::vector<Table>& tables,
             const ParentConfig& cfg) {
  check_corpus(hypotheses.size(), references.size());
  if (tables.size() != hypotheses.size()) {
    throw std::runtime_error("hypothesis/table count mismatch: " +
                             std::to_string(hypotheses.size()) + " vs " +
                             std::to_string(tables.size()));
  }
  double sum_p = 0.0, sum_r = 0.0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const PRF e = parent_example(hypotheses[i], references[i], tables[i], cfg);
    sum_p += e.precision;
    sum_r += e.recall;
  }
  PRF out;
  out.precision = sum_p / static_cast<double>(hypotheses.size());
  out.recall = sum_r / static_cast<double>(hypotheses.size());
  out.f1 = harmonic_mean(out.precision, out.recall);
  return out;
}

EntityOverlap entity_overlap_report(const std::string& hypothesis, const Table& t) {
  const auto hyp = metric_tokens(hypothesis);
  std::set<std::string> hyp_words(hyp.begin(), hyp.end());

  EntityOverlap out;
  for (const auto& p : t.pairs) {
    const auto value = metric_tokens(p.value);
    if (value.empty()) continue;
    if (contains_subsequence(hyp, value)) {
      ++out.supported;
      continue;
    }
    const bool partial = std::any_of(value.begin(), value.end(), [&](const std::string& w) {
      return is_content_token(w) && hyp_words.count(w) != 0;
    });
    if (partial) ++out.contradicted;
  }
  return out;
}

MetricReport evaluate_all(const std::vector<std::string>& hypotheses,
                          const std::vector<std::string>& references,
                          const std::vector<Table>& tables, const ParentConfig& cfg) {
  MetricReport report;
  report.n_examples = hypotheses.size();
  report.bleu4 = bleu4(hypotheses, references);
  const PRF r = rouge4(hypotheses, references);
  report.rouge4_precision = r.precision;
  report.rouge4_recall = r.recall;
  report.rouge4_f1 = r.f1;
  const PRF p = parent_f(hypotheses, references, tables, cfg);
  report.parent_precision = p.precision;
  report.parent_recall = p.recall;
  report.parent_f1 = p.f1;
  return report;
}

}  // namespace adaptgen
