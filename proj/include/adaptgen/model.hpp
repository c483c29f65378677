#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "adaptgen/graph.hpp"
#include "adaptgen/params.hpp"
#include "adaptgen/tokenizer.hpp"

namespace adaptgen {

enum class AdapterPlacement { EveryLayer, FinalLayerOnly, None };

inline const char* to_string(AdapterPlacement p) {
  switch (p) {
    case AdapterPlacement::EveryLayer: return "every_layer";
    case AdapterPlacement::FinalLayerOnly: return "final_layer_only";
    case AdapterPlacement::None: return "none";
  }
  return "?";
}

struct ModelConfig {
  int vocab_size = 0;
  int d_model = 32;
  int n_heads = 2;
  int n_encoder_layers = 2;
  int n_decoder_layers = 2;
  int d_ffn = 64;
  int d_bottleneck = 8;
  AdapterPlacement adapter_placement = AdapterPlacement::EveryLayer;
  // Optional nonlinearity between the adapter projections; the literal
  // residual bottleneck has none.
  bool adapter_activation = false;
  int max_positions = 128;

  void validate() const {
    if (vocab_size < 8) throw std::runtime_error("vocab_size must be >= 8");
    if (d_model < 1 || n_heads < 1 || d_ffn < 1 || d_bottleneck < 1 || max_positions < 1 ||
        n_encoder_layers < 1 || n_decoder_layers < 1) {
      throw std::runtime_error("model dimensions must be >= 1");
    }
    if (d_model % n_heads != 0) throw std::runtime_error("d_model must be divisible by n_heads");
    if (d_bottleneck >= d_model) throw std::runtime_error("d_bottleneck must be < d_model");
  }

  bool layer_has_adapter(int layer, int n_layers) const {
    switch (adapter_placement) {
      case AdapterPlacement::EveryLayer: return true;
      case AdapterPlacement::FinalLayerOnly: return layer == n_layers - 1;
      case AdapterPlacement::None: return false;
    }
    return false;
  }
};

// Binds store tensors into a graph on demand, once per name, and harvests
// their gradients after backward.
template <class Scalar>
class BoundParams {
 public:
  using Var = typename Graph<Scalar>::Var;

  BoundParams(Graph<Scalar>& g, ParamStore<Scalar>& store, bool train)
      : graph_(g), store_(store), train_(train) {}

  Var operator()(const std::string& name) {
    auto it = vars_.find(name);
    if (it != vars_.end()) return it->second;
    const bool needs = train_ && store_.trainable(name);
    Var v = graph_.input(store_.at(name), needs);
    vars_.emplace(name, v);
    return v;
  }

  void harvest(GradMap<Scalar>& out) {
    for (const auto& [name, var] : vars_) {
      if (store_.trainable(name)) out.accumulate(name, graph_.grad(var));
    }
  }

 private:
  Graph<Scalar>& graph_;
  ParamStore<Scalar>& store_;
  bool train_;
  std::unordered_map<std::string, Var> vars_;
};

namespace detail {

constexpr double kMaskValue = -1e9;

// Additive attention mask of shape n_q x n_k. Key positions flagged as pad
// are excluded; causal additionally hides keys right of the query.
template <class Scalar>
Matrix<Scalar> attention_mask(Eigen::Index n_q, const std::vector<bool>& key_is_pad, bool causal) {
  Matrix<Scalar> m = Matrix<Scalar>::Zero(n_q, static_cast<Eigen::Index>(key_is_pad.size()));
  for (Eigen::Index q = 0; q < n_q; ++q) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      if (key_is_pad[static_cast<std::size_t>(k)] || (causal && k > q)) {
        m(q, k) = Scalar(kMaskValue);
      }
    }
  }
  return m;
}

template <class Scalar>
typename Graph<Scalar>::Var multi_head_attention(Graph<Scalar>& g, BoundParams<Scalar>& p,
                                                 const std::string& prefix,
                                                 typename Graph<Scalar>::Var queries,
                                                 typename Graph<Scalar>::Var keys_values,
                                                 const Matrix<Scalar>& mask, int n_heads) {
  using Var = typename Graph<Scalar>::Var;
  const Eigen::Index d_model = g.value(queries).cols();
  const Eigen::Index d_head = d_model / n_heads;
  const Scalar scale = Scalar(1) / static_cast<Scalar>(std::sqrt(static_cast<double>(d_head)));

  Var q = g.matmul(queries, p(prefix + ".wq"));
  Var k = g.matmul(keys_values, p(prefix + ".wk"));
  Var v = g.matmul(keys_values, p(prefix + ".wv"));

  std::vector<Var> heads;
  heads.reserve(static_cast<std::size_t>(n_heads));
  for (int h = 0; h < n_heads; ++h) {
    Var qh = g.slice_cols(q, h * d_head, d_head);
    Var kh = g.slice_cols(k, h * d_head, d_head);
    Var vh = g.slice_cols(v, h * d_head, d_head);
    Var scores = g.scale(g.matmul_nt(qh, kh), scale);
    Var probs = g.softmax_rows(scores, &mask);
    heads.push_back(g.matmul(probs, vh));
  }
  Var merged = n_heads == 1 ? heads[0] : g.concat_cols(heads);
  return g.matmul(merged, p(prefix + ".wo"));
}

template <class Scalar>
typename Graph<Scalar>::Var feed_forward(Graph<Scalar>& g, BoundParams<Scalar>& p,
                                         const std::string& prefix,
                                         typename Graph<Scalar>::Var x) {
  auto h = g.add_rowvec(g.matmul(x, p(prefix + ".w1")), p(prefix + ".b1"));
  h = g.relu(h);
  return g.add_rowvec(g.matmul(h, p(prefix + ".w2")), p(prefix + ".b2"));
}

template <class Scalar>
typename Graph<Scalar>::Var layer_norm(Graph<Scalar>& g, BoundParams<Scalar>& p,
                                       const std::string& prefix,
                                       typename Graph<Scalar>::Var x) {
  return g.layer_norm(x, p(prefix + ".g"), p(prefix + ".b"));
}

// Residual bottleneck: h + W_up(act(W_down h)), applied rowwise.
template <class Scalar>
typename Graph<Scalar>::Var adapter_block(Graph<Scalar>& g, BoundParams<Scalar>& p,
                                          const std::string& prefix,
                                          typename Graph<Scalar>::Var h, bool activation) {
  auto mid = g.matmul(h, p(prefix + ".w_down"));
  if (activation) mid = g.relu(mid);
  return g.add(h, g.matmul(mid, p(prefix + ".w_up")));
}

template <class Scalar>
typename Graph<Scalar>::Var embed_sequence(Graph<Scalar>& g, BoundParams<Scalar>& p,
                                           const std::string& tok_name,
                                           const std::string& pos_name,
                                           const std::vector<int>& ids) {
  std::vector<int> positions(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) positions[i] = static_cast<int>(i);
  return g.add(g.rows(p(tok_name), ids), g.rows(p(pos_name), positions));
}

}  // namespace detail

// Plain-matrix form of the residual bottleneck, for callers outside a graph.
// h is a length-d_model vector; W_down is d_model x d_bottleneck, W_up is
// d_bottleneck x d_model.
template <class Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> adapter_forward(
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>& h, const Matrix<Scalar>& w_down,
    const Matrix<Scalar>& w_up, bool activation = false) {
  if (h.cols() != w_down.rows()) throw std::runtime_error("adapter_forward: dim(h) != d_model");
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> mid = h * w_down;
  if (activation) mid = mid.cwiseMax(Scalar(0));
  return (mid * w_up + h).eval();
}

// Encoder-decoder transformer over the shared closed vocabulary, with
// residual bottleneck adapters after each (or only the final) layer.
template <class Scalar>
class Seq2SeqModel {
 public:
  using Mat = Matrix<Scalar>;
  using Var = typename Graph<Scalar>::Var;

  ModelConfig cfg;
  ParamStore<Scalar> params;

  static Seq2SeqModel init(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Seq2SeqModel m;
    m.cfg = cfg;
    auto& p = m.params;
    const int d = cfg.d_model;
    p.add("embed.tok", cfg.vocab_size, d);
    p.add("embed.pos", cfg.max_positions, d);
    for (int i = 0; i < cfg.n_encoder_layers; ++i) {
      const std::string base = "enc." + std::to_string(i);
      for (const char* w : {".attn.wq", ".attn.wk", ".attn.wv", ".attn.wo"}) p.add(base + w, d, d);
      p.add(base + ".ln1.g", 1, d);
      p.add(base + ".ln1.b", 1, d);
      p.add(base + ".ffn.w1", d, cfg.d_ffn);
      p.add(base + ".ffn.b1", 1, cfg.d_ffn);
      p.add(base + ".ffn.w2", cfg.d_ffn, d);
      p.add(base + ".ffn.b2", 1, d);
      p.add(base + ".ln2.g", 1, d);
      p.add(base + ".ln2.b", 1, d);
      if (cfg.layer_has_adapter(i, cfg.n_encoder_layers)) {
        p.add(base + ".adapter.w_down", d, cfg.d_bottleneck);
        p.add(base + ".adapter.w_up", cfg.d_bottleneck, d);
      }
    }
    for (int i = 0; i < cfg.n_decoder_layers; ++i) {
      const std::string base = "dec." + std::to_string(i);
      for (const char* w : {".self.wq", ".self.wk", ".self.wv", ".self.wo"}) p.add(base + w, d, d);
      p.add(base + ".ln1.g", 1, d);
      p.add(base + ".ln1.b", 1, d);
      for (const char* w : {".cross.wq", ".cross.wk", ".cross.wv", ".cross.wo"}) p.add(base + w, d, d);
      p.add(base + ".ln2.g", 1, d);
      p.add(base + ".ln2.b", 1, d);
      p.add(base + ".ffn.w1", d, cfg.d_ffn);
      p.add(base + ".ffn.b1", 1, cfg.d_ffn);
      p.add(base + ".ffn.w2", cfg.d_ffn, d);
      p.add(base + ".ffn.b2", 1, d);
      p.add(base + ".ln3.g", 1, d);
      p.add(base + ".ln3.b", 1, d);
      if (cfg.layer_has_adapter(i, cfg.n_decoder_layers)) {
        p.add(base + ".adapter.w_down", d, cfg.d_bottleneck);
        p.add(base + ".adapter.w_up", cfg.d_bottleneck, d);
      }
    }
    p.add("out.w", d, cfg.vocab_size);
    p.add("out.b", 1, cfg.vocab_size);

    DeterministicRng rng(seed);
    std::vector<std::string> zeros, ones;
    for (const auto& t : p.tensors()) {
      const std::string& n = t.name;
      if (n.ends_with(".w_up") || n.ends_with(".b") || n.ends_with(".b1") || n.ends_with(".b2")) {
        zeros.push_back(n);
      } else if (n.ends_with(".g")) {
        ones.push_back(n);
      }
    }
    p.init_glorot(rng, zeros, ones);
    return m;
  }

  Var encode(Graph<Scalar>& g, BoundParams<Scalar>& p, const std::vector<int>& src) const {
    check_length(src, "source");
    const std::vector<bool> pad = pad_flags(src);
    Var x = detail::embed_sequence(g, p, "embed.tok", "embed.pos", src);
    const Mat self_mask = detail::attention_mask<Scalar>(
        static_cast<Eigen::Index>(src.size()), pad, /*causal=*/false);
    for (int i = 0; i < cfg.n_encoder_layers; ++i) {
      const std::string base = "enc." + std::to_string(i);
      Var a = detail::multi_head_attention(g, p, base + ".attn", x, x, self_mask, cfg.n_heads);
      x = detail::layer_norm(g, p, base + ".ln1", g.add(x, a));
      Var f = detail::feed_forward(g, p, base + ".ffn", x);
      x = detail::layer_norm(g, p, base + ".ln2", g.add(x, f));
      if (cfg.layer_has_adapter(i, cfg.n_encoder_layers)) {
        x = detail::adapter_block(g, p, base + ".adapter", x, cfg.adapter_activation);
      }
    }
    return x;
  }

  // Teacher-forced decoder: logits has one row per decoder input position.
  Var decode(Graph<Scalar>& g, BoundParams<Scalar>& p, Var memory,
             const std::vector<int>& src, const std::vector<int>& tgt_in) const {
    check_length(tgt_in, "target");
    const std::vector<bool> src_pad = pad_flags(src);
    const std::vector<bool> tgt_pad = pad_flags(tgt_in);
    const Eigen::Index n = static_cast<Eigen::Index>(tgt_in.size());
    const Mat self_mask = detail::attention_mask<Scalar>(n, tgt_pad, /*causal=*/true);
    const Mat cross_mask = detail::attention_mask<Scalar>(n, src_pad, /*causal=*/false);

    Var x = detail::embed_sequence(g, p, "embed.tok", "embed.pos", tgt_in);
    for (int i = 0; i < cfg.n_decoder_layers; ++i) {
      const std::string base = "dec." + std::to_string(i);
      Var a = detail::multi_head_attention(g, p, base + ".self", x, x, self_mask, cfg.n_heads);
      x = detail::layer_norm(g, p, base + ".ln1", g.add(x, a));
      Var c = detail::multi_head_attention(g, p, base + ".cross", x, memory, cross_mask, cfg.n_heads);
      x = detail::layer_norm(g, p, base + ".ln2", g.add(x, c));
      Var f = detail::feed_forward(g, p, base + ".ffn", x);
      x = detail::layer_norm(g, p, base + ".ln3", g.add(x, f));
      if (cfg.layer_has_adapter(i, cfg.n_decoder_layers)) {
        x = detail::adapter_block(g, p, base + ".adapter", x, cfg.adapter_activation);
      }
    }
    return g.add_rowvec(g.matmul(x, p("out.w")), p("out.b"));
  }

  Var forward(Graph<Scalar>& g, BoundParams<Scalar>& p, const std::vector<int>& src,
              const std::vector<int>& tgt_in) const {
    return decode(g, p, encode(g, p, src), src, tgt_in);
  }

  // Inference-only logits.
  Mat logits(const std::vector<int>& src, const std::vector<int>& tgt_in) const {
    Graph<Scalar> g;
    BoundParams<Scalar> p(g, const_cast<ParamStore<Scalar>&>(params), /*train=*/false);
    return g.value(forward(g, p, src, tgt_in));
  }

  // Argmax decoding, ties broken by lowest token id; stops after <eos> or
  // max_len generated tokens. The returned sequence excludes <bos>.
  std::vector<int> greedy_decode(const std::vector<int>& src, int max_len) const {
    if (max_len < 1) throw std::runtime_error("greedy_decode: max_len must be >= 1");
    std::vector<int> out;
    std::vector<int> tgt_in{Vocab::kBos};
    for (int step = 0; step < max_len; ++step) {
      if (static_cast<int>(tgt_in.size()) > cfg.max_positions) break;
      const Mat z = logits(src, tgt_in);
      const Eigen::Index last = z.rows() - 1;
      int best = 0;
      for (Eigen::Index c = 1; c < z.cols(); ++c) {
        if (z(last, c) > z(last, best)) best = static_cast<int>(c);
      }
      out.push_back(best);
      if (best == Vocab::kEos) break;
      tgt_in.push_back(best);
    }
    return out;
  }

 private:
  static std::vector<bool> pad_flags(const std::vector<int>& ids) {
    std::vector<bool> f(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) f[i] = ids[i] == Vocab::kPad;
    return f;
  }

  void check_length(const std::vector<int>& ids, const char* what) const {
    if (ids.empty()) throw std::runtime_error(std::string(what) + " sequence is empty");
    if (static_cast<int>(ids.size()) > cfg.max_positions) {
      throw std::runtime_error(std::string(what) + " sequence length " +
                               std::to_string(ids.size()) + " exceeds max_positions " +
                               std::to_string(cfg.max_positions));
    }
  }
};

// Mean negative log-likelihood per non-pad target token.
template <class Scalar>
typename Graph<Scalar>::Var sequence_cross_entropy(Graph<Scalar>& g,
                                                   typename Graph<Scalar>::Var logits,
                                                   const std::vector<int>& targets) {
  std::vector<bool> active(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) active[i] = targets[i] != Vocab::kPad;
  return g.cross_entropy_rows(logits, targets, active);
}

}  // namespace adaptgen
