#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "adaptgen/data.hpp"
#include "adaptgen/model.hpp"

namespace adaptgen {

struct SelectorConfig {
  int vocab_size = 0;
  int d_model = 16;
  int n_heads = 2;
  int n_layers = 2;  // 0 reduces the encoder to token+position embeddings
  int d_ffn = 32;
  int max_positions = 128;

  void validate() const {
    if (vocab_size < 8) throw std::runtime_error("selector vocab_size must be >= 8");
    if (d_model < 1 || n_heads < 1 || d_ffn < 1 || max_positions < 1 || n_layers < 0) {
      throw std::runtime_error("selector dimensions invalid");
    }
    if (d_model % n_heads != 0) throw std::runtime_error("selector d_model must be divisible by n_heads");
  }
};

// The n corpus sentences selected for a table, scores non-increasing, ties
// broken by corpus index ascending.
struct PrototypeSet {
  struct Member {
    std::string sentence;
    double score = 0.0;
    std::size_t corpus_index = 0;
  };
  std::string table_id;
  std::vector<Member> members;
  int n = 0;

  std::vector<std::string> sentences() const {
    std::vector<std::string> out;
    out.reserve(members.size());
    for (const auto& m : members) out.push_back(m.sentence);
    return out;
  }
};

// Scores a candidate sentence against a table: a linear projection of the
// mean-pooled encoding of "linearize(T) <sep> b".
template <class Scalar>
class PrototypeSelector {
 public:
  using Var = typename Graph<Scalar>::Var;

  SelectorConfig cfg;
  ParamStore<Scalar> params;

  static PrototypeSelector init(const SelectorConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    PrototypeSelector s;
    s.cfg = cfg;
    auto& p = s.params;
    const int d = cfg.d_model;
    p.add("sel.embed.tok", cfg.vocab_size, d);
    p.add("sel.embed.pos", cfg.max_positions, d);
    for (int i = 0; i < cfg.n_layers; ++i) {
      const std::string base = "sel." + std::to_string(i);
      for (const char* w : {".attn.wq", ".attn.wk", ".attn.wv", ".attn.wo"}) p.add(base + w, d, d);
      p.add(base + ".ln1.g", 1, d);
      p.add(base + ".ln1.b", 1, d);
      p.add(base + ".ffn.w1", d, cfg.d_ffn);
      p.add(base + ".ffn.b1", 1, cfg.d_ffn);
      p.add(base + ".ffn.w2", cfg.d_ffn, d);
      p.add(base + ".ffn.b2", 1, d);
      p.add(base + ".ln2.g", 1, d);
      p.add(base + ".ln2.b", 1, d);
    }
    p.add("sel.proj.w", d, 1);
    p.add("sel.proj.b", 1, 1);

    DeterministicRng rng(seed);
    std::vector<std::string> zeros{"sel.proj.b"}, ones;
    for (const auto& t : p.tensors()) {
      if (t.name.ends_with(".b1") || t.name.ends_with(".b2") || t.name.ends_with("ln1.b") ||
          t.name.ends_with("ln2.b")) {
        zeros.push_back(t.name);
      } else if (t.name.ends_with(".g")) {
        ones.push_back(t.name);
      }
    }
    p.init_glorot(rng, zeros, ones);
    return s;
  }

  // Token ids for the scoring input "linearize(T) <sep> b", truncated at the
  // tail to max_positions.
  std::vector<int> scoring_input(const Table& t, const std::string& sentence,
                                 const Vocab& vocab) const {
    std::vector<int> ids = vocab.encode(lowercase(linearize_table(t)));
    ids.push_back(Vocab::kSep);
    for (int id : vocab.encode(lowercase(sentence))) ids.push_back(id);
    if (static_cast<int>(ids.size()) > cfg.max_positions) {
      ids.resize(static_cast<std::size_t>(cfg.max_positions));
    }
    return ids;
  }

  Var score_var(Graph<Scalar>& g, BoundParams<Scalar>& p, const std::vector<int>& ids) const {
    if (ids.empty()) throw std::runtime_error("selector input is empty");
    std::vector<bool> pad(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) pad[i] = ids[i] == Vocab::kPad;
    Var x = detail::embed_sequence(g, p, "sel.embed.tok", "sel.embed.pos", ids);
    const Matrix<Scalar> mask = detail::attention_mask<Scalar>(
        static_cast<Eigen::Index>(ids.size()), pad, /*causal=*/false);
    for (int i = 0; i < cfg.n_layers; ++i) {
      const std::string base = "sel." + std::to_string(i);
      Var a = detail::multi_head_attention(g, p, base + ".attn", x, x, mask, cfg.n_heads);
      x = detail::layer_norm(g, p, base + ".ln1", g.add(x, a));
      Var f = detail::feed_forward(g, p, base + ".ffn", x);
      x = detail::layer_norm(g, p, base + ".ln2", g.add(x, f));
    }
    Var pooled = g.mean_rows(x);
    return g.add(g.matmul(pooled, p("sel.proj.w")), p("sel.proj.b"));
  }

  double score_candidate(const Table& t, const std::string& sentence, const Vocab& vocab) const {
    if (sentence.empty()) throw std::runtime_error("cannot score empty candidate");
    Graph<Scalar> g;
    BoundParams<Scalar> p(g, const_cast<ParamStore<Scalar>&>(params), /*train=*/false);
    return static_cast<double>(g.value(score_var(g, p, scoring_input(t, sentence, vocab)))(0, 0));
  }

  // Top-n subset maximizing the score sum; additive, so equal to the top-n by
  // individual score. Ties go to the lower corpus index.
  PrototypeSet select_prototypes(const Table& t, const std::vector<std::string>& candidates,
                                 int n, const Vocab& vocab) const {
    if (n < 1) throw std::runtime_error("prototype count n must be >= 1");
    std::vector<double> scores(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      scores[i] = score_candidate(t, candidates[i], vocab);
    }
    return rank_by_scores(t.id, candidates, scores, n);
  }

  // Ranking step isolated so tests can drive it with explicit scores.
  static PrototypeSet rank_by_scores(const std::string& table_id,
                                     const std::vector<std::string>& candidates,
                                     const std::vector<double>& scores, int n) {
    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return a < b;
    });
    PrototypeSet set;
    set.table_id = table_id;
    set.n = n;
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(n), candidates.size());
    for (std::size_t i = 0; i < take; ++i) {
      set.members.push_back({candidates[order[i]], scores[order[i]], order[i]});
    }
    return set;
  }

  // Hinge ranking loss sum_j max(0, 1 - f(T,r) + f(T,b_j)) as a graph node.
  Var loss_var(Graph<Scalar>& g, BoundParams<Scalar>& p, const Table& t,
               const std::string& reference, const std::vector<std::string>& negatives,
               const Vocab& vocab) const {
    if (negatives.empty()) throw std::runtime_error("hinge loss needs at least one negative");
    Var pos = score_var(g, p, scoring_input(t, reference, vocab));
    Var total{};
    for (const std::string& neg : negatives) {
      Var ns = score_var(g, p, scoring_input(t, neg, vocab));
      // max(0, 1 - pos + neg)
      Var margin = g.relu(g.add(g.affine(pos, Scalar(-1), Scalar(1)), ns));
      total = total.valid() ? g.add(total, margin) : margin;
    }
    return total;
  }

  double prototype_selection_loss(const Table& t, const std::string& reference,
                                  const std::vector<std::string>& negatives,
                                  const Vocab& vocab) const {
    Graph<Scalar> g;
    BoundParams<Scalar> p(g, const_cast<ParamStore<Scalar>&>(params), /*train=*/false);
    return static_cast<double>(g.value(loss_var(g, p, t, reference, negatives, vocab))(0, 0));
  }
};

// sum_j max(0, 1 - positive + negative_j); the score-level form of the
// ranking objective, shared by tests and the trainable graph version.
inline double hinge_ranking_loss(double positive_score, const std::vector<double>& negative_scores) {
  double loss = 0.0;
  for (double neg : negative_scores) loss += std::max(0.0, 1.0 - positive_score + neg);
  return loss;
}

// k candidates drawn uniformly, excluding exact string matches of the
// reference; without replacement when enough remain, with replacement
// otherwise. Deterministic under seed.
std::vector<std::string> sample_negatives(const std::vector<std::string>& candidates,
                                          const std::string& reference, int k,
                                          std::uint64_t seed);

}  // namespace adaptgen
