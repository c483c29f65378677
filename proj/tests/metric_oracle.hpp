#pragma once

// Independent brute-force metric oracles shared by the unit tests and the
// acceptance suite. These deliberately avoid the hashed n-gram counting of
// the implementation: n-grams are token vectors matched by pairwise
// comparison.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "adaptgen/metrics.hpp"
#include "adaptgen/rng.hpp"
#include "adaptgen/tokenizer.hpp"

namespace oracle {

using Toks = std::vector<std::string>;

inline Toks toks(const std::string& s) {
  return adaptgen::tokenize(adaptgen::lowercase(s));
}

inline std::vector<Toks> ngrams(const Toks& t, std::size_t n) {
  std::vector<Toks> out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) out.emplace_back(t.begin() + i, t.begin() + i + n);
  return out;
}

inline std::size_t count_of(const std::vector<Toks>& grams, const Toks& g) {
  std::size_t c = 0;
  for (const auto& x : grams) c += x == g ? 1 : 0;
  return c;
}

// clipped matches of hyp n-grams against ref n-grams
inline std::size_t clipped_matches(const std::vector<Toks>& hyp, const std::vector<Toks>& ref) {
  std::size_t total = 0;
  std::vector<Toks> seen;
  for (const auto& g : hyp) {
    if (count_of(seen, g) > 0) continue;
    seen.push_back(g);
    total += std::min(count_of(hyp, g), count_of(ref, g));
  }
  return total;
}

inline double bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs) {
  double log_p = 0.0;
  std::size_t c = 0, r = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    std::size_t match = 0, total = 0;
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      const auto h = ngrams(toks(hyps[i]), n);
      const auto g = ngrams(toks(refs[i]), n);
      match += clipped_matches(h, g);
      total += h.size();
    }
    if (match == 0 || total == 0) return 0.0;
    log_p += std::log(static_cast<double>(match) / static_cast<double>(total)) / 4.0;
  }
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    c += toks(hyps[i]).size();
    r += toks(refs[i]).size();
  }
  const double bp = c >= r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  return 100.0 * bp * std::exp(log_p);
}

inline adaptgen::PRF rouge4(const std::vector<std::string>& hyps,
                            const std::vector<std::string>& refs) {
  std::size_t overlap = 0, ht = 0, rt = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const auto h = ngrams(toks(hyps[i]), 4);
    const auto g = ngrams(toks(refs[i]), 4);
    overlap += clipped_matches(h, g);
    ht += h.size();
    rt += g.size();
  }
  adaptgen::PRF out;
  out.precision = ht ? static_cast<double>(overlap) / static_cast<double>(ht) : 0.0;
  out.recall = rt ? static_cast<double>(overlap) / static_cast<double>(rt) : 0.0;
  out.f1 = out.precision + out.recall > 0
               ? 2 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

inline adaptgen::PRF parent(const std::string& hyp_s, const std::string& ref_s,
                            const adaptgen::Table& table, double lambda) {
  const Toks hyp = toks(hyp_s);
  const Toks ref = toks(ref_s);
  if (hyp.empty()) return {0, 0, 0};

  std::set<std::string> table_words;
  for (const auto& p : table.pairs) {
    for (const auto& w : toks(p.value)) table_words.insert(w);
  }

  double log_prec = 0.0;
  std::size_t orders = 0;
  bool zero = false;
  for (std::size_t n = 1; n <= 4 && n <= hyp.size(); ++n) {
    const auto hg = ngrams(hyp, n);
    const auto rg = ngrams(ref, n);
    double credit = 0.0;
    std::vector<Toks> seen;
    for (const auto& g : hg) {
      if (count_of(seen, g) > 0) continue;
      seen.push_back(g);
      const std::size_t ch = count_of(hg, g);
      const std::size_t in_ref = std::min(ch, count_of(rg, g));
      std::size_t ent = 0;
      for (const auto& w : g) ent += table_words.count(w) ? 1 : 0;
      credit += static_cast<double>(in_ref) +
                static_cast<double>(ch - in_ref) * static_cast<double>(ent) / static_cast<double>(n);
    }
    const double p = credit / static_cast<double>(hg.size());
    if (p <= 0.0) {
      zero = true;
      break;
    }
    log_prec += std::log(p);
    ++orders;
  }
  const double precision =
      (zero || orders == 0) ? 0.0 : std::exp(log_prec / static_cast<double>(orders));

  double log_rr = 0.0;
  orders = 0;
  zero = false;
  for (std::size_t n = 1; n <= 4 && n <= ref.size(); ++n) {
    const auto hg = ngrams(hyp, n);
    const auto rg = ngrams(ref, n);
    const double r = static_cast<double>(clipped_matches(rg, hg)) / static_cast<double>(rg.size());
    if (r <= 0.0) {
      zero = true;
      break;
    }
    log_rr += std::log(r);
    ++orders;
  }
  const double r_ref = (zero || orders == 0) ? 0.0 : std::exp(log_rr / static_cast<double>(orders));

  double r_tab = 1.0;
  if (!table_words.empty()) {
    std::size_t ent = 0;
    for (const auto& w : hyp) ent += table_words.count(w) ? 1 : 0;
    r_tab = static_cast<double>(ent) / static_cast<double>(hyp.size());
  }

  adaptgen::PRF out;
  out.precision = precision;
  out.recall =
      (r_ref <= 0 || r_tab <= 0) ? 0.0 : std::pow(r_ref, 1.0 - lambda) * std::pow(r_tab, lambda);
  out.f1 = out.precision + out.recall > 0
               ? 2 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

// deterministic toy corpus generator shared by the oracle-equivalence cases
struct ToyCase {
  std::vector<std::string> hyps, refs;
  std::vector<adaptgen::Table> tables;
};

inline ToyCase random_corpus(std::uint64_t seed, std::size_t n_examples) {
  const std::vector<std::string> words = {"the", "actor", "was", "born", "in", "york",
                                          "new", "famous", "a", "singer", "plays"};
  adaptgen::DeterministicRng rng(seed);
  ToyCase tc;
  for (std::size_t i = 0; i < n_examples; ++i) {
    auto sentence = [&](std::size_t min_len) {
      std::string s;
      const std::size_t len = min_len + rng.below(8);
      for (std::size_t k = 0; k < len; ++k) {
        if (k > 0) s += ' ';
        s += words[rng.below(words.size())];
      }
      return s;
    };
    tc.hyps.push_back(sentence(1));
    tc.refs.push_back(sentence(2));
    adaptgen::Table t{"t" + std::to_string(i), {}};
    const std::size_t n_pairs = rng.below(3);  // sometimes empty
    for (std::size_t k = 0; k < n_pairs; ++k) {
      t.pairs.push_back({"attr" + std::to_string(k),
                         words[rng.below(words.size())] + " " + words[rng.below(words.size())]});
    }
    if (t.pairs.empty()) t.pairs.push_back({"attr", "zzz"});
    tc.tables.push_back(t);
  }
  return tc;
}

}  // namespace oracle
