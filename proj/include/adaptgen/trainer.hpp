#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adaptgen/checkpoint.hpp"
#include "adaptgen/data.hpp"
#include "adaptgen/model.hpp"
#include "adaptgen/optimizer.hpp"
#include "adaptgen/prompt.hpp"
#include "adaptgen/selector.hpp"
#include "adaptgen/tokenizer.hpp"

namespace adaptgen {

// The three-stage strategy: generation-module pretraining (prototype
// selection + language modeling, trained separately), knowledge-augmentation
// pretraining with only adapters trainable, and fine-tuning with adapters
// frozen.
enum class Stage { GenPS, GenLM, KA, Finetune };

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::GenPS: return "GEN_PS";
    case Stage::GenLM: return "GEN_LM";
    case Stage::KA: return "KA";
    case Stage::Finetune: return "FINETUNE";
  }
  return "?";
}

struct StageConfig {
  Stage stage = Stage::GenLM;
  double learning_rate = 3e-5;
  int batch_size = 16;
  int max_steps = 100;
  std::uint64_t seed = 1;
  FreezePolicy freeze_policy = FreezePolicy::AllTrainable;

  void validate() const;
};

// Ablation flags and output location for one pipeline run. Stage order is
// GEN_PS?, GEN_LM, KA?, FINETUNE; the optional stages are controlled by the
// flags (use_pt gates GEN_PS, use_pa gates KA).
struct RunManifest {
  bool use_pa = true;
  bool use_pt = true;
  std::string out_dir = ".";

  std::vector<Stage> stage_order() const;
  std::string checkpoint_path(Stage s) const;
};

// Token ids of "proto1 <sep> proto2 ... <sep> protoN <context_start>
// linearize(T) <eos>". With zero prototypes the sequence starts at
// <context_start>. Over budget, prototypes are dropped from the lowest-scored
// end, never the table; a table that alone exceeds the budget is an error.
std::vector<int> build_lm_input(const PrototypeSet& prototypes, const Table& t, const Vocab& v,
                                int max_positions);

// Prototype cache persistence; scores round-trip exactly (hexfloat).
void save_prototype_cache(const std::map<std::string, PrototypeSet>& cache,
                          const std::string& path);
std::map<std::string, PrototypeSet> load_prototype_cache(const std::string& path);

inline std::uint64_t mix_seed(std::uint64_t seed, const std::string& tag) {
  return fnv1a(tag.data(), tag.size()) ^ (seed * 0x9E3779B97F4A7C15ULL);
}

// One teacher-forced sequence pair; target ends with <eos> and excludes <bos>.
struct SeqExample {
  std::vector<int> src;
  std::vector<int> target;
};

struct SelectorExample {
  Table table;
  std::string reference;
};

struct StageResult {
  std::vector<double> losses;  // one mean loss per optimizer step
};

namespace detail {

inline void check_finite(double loss, Stage stage, int step) {
  if (!std::isfinite(loss)) {
    throw std::runtime_error(std::string("non-finite loss in stage ") + to_string(stage) +
                             " at step " + std::to_string(step) + ": " + std::to_string(loss));
  }
}

}  // namespace detail

// Runs max_steps optimizer steps of teacher-forced sequence training under
// the stage's freeze policy. Deterministic under cfg.seed; a fresh optimizer
// is created per stage. keep_adapters_frozen additionally pins adapter
// tensors, used by the adapter-free ablation so the zero-init identity is
// preserved through every stage.
template <class Scalar>
StageResult run_stage(const StageConfig& cfg, Seq2SeqModel<Scalar>& model,
                      const std::vector<SeqExample>& data, bool keep_adapters_frozen = false) {
  cfg.validate();
  if (cfg.stage == Stage::GenPS) {
    throw std::runtime_error("run_stage: GEN_PS trains the selector, use run_selector_stage");
  }
  if (data.empty()) {
    throw std::runtime_error(std::string("stage ") + to_string(cfg.stage) +
                             " has no training data");
  }
  model.params.apply_freeze_policy(cfg.freeze_policy);
  if (keep_adapters_frozen) {
    for (auto& t : model.params.tensors()) {
      if (is_adapter_tensor(t.name)) t.trainable = false;
    }
  }
  AdamOptimizer<Scalar> opt(static_cast<Scalar>(cfg.learning_rate));
  DeterministicRng rng(mix_seed(cfg.seed, to_string(cfg.stage)));

  StageResult result;
  result.losses.reserve(static_cast<std::size_t>(cfg.max_steps));
  for (int step = 0; step < cfg.max_steps; ++step) {
    GradMap<Scalar> grads;
    double loss_sum = 0.0;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const SeqExample& ex = data[rng.below(data.size())];
      std::vector<int> tgt_in;
      tgt_in.reserve(ex.target.size());
      tgt_in.push_back(Vocab::kBos);
      tgt_in.insert(tgt_in.end(), ex.target.begin(), ex.target.end() - 1);
      Graph<Scalar> g;
      BoundParams<Scalar> p(g, model.params, /*train=*/true);
      auto loss = sequence_cross_entropy(g, model.forward(g, p, ex.src, tgt_in), ex.target);
      loss_sum += static_cast<double>(g.value(loss)(0, 0));
      g.backward(loss);
      p.harvest(grads);
    }
    grads.scale(Scalar(1) / static_cast<Scalar>(cfg.batch_size));
    opt.step(model.params, grads);
    const double mean_loss = loss_sum / cfg.batch_size;
    detail::check_finite(mean_loss, cfg.stage, step);
    result.losses.push_back(mean_loss);
  }
  return result;
}

// Hinge-ranking training of the prototype selector. Negatives are resampled
// deterministically per (seed, step, batch index).
template <class Scalar>
StageResult run_selector_stage(const StageConfig& cfg, PrototypeSelector<Scalar>& selector,
                               const std::vector<SelectorExample>& data,
                               const PrototypeCorpus& corpus, const Vocab& vocab,
                               int negatives_k) {
  cfg.validate();
  if (cfg.stage != Stage::GenPS) {
    throw std::runtime_error("run_selector_stage: expected the GEN_PS stage");
  }
  if (data.empty()) throw std::runtime_error("stage GEN_PS has no training data");
  if (negatives_k < 1) throw std::runtime_error("negatives_k must be >= 1");
  selector.params.apply_freeze_policy(cfg.freeze_policy);
  AdamOptimizer<Scalar> opt(static_cast<Scalar>(cfg.learning_rate));
  DeterministicRng rng(mix_seed(cfg.seed, to_string(cfg.stage)));

  StageResult result;
  result.losses.reserve(static_cast<std::size_t>(cfg.max_steps));
  for (int step = 0; step < cfg.max_steps; ++step) {
    GradMap<Scalar> grads;
    double loss_sum = 0.0;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const SelectorExample& ex = data[rng.below(data.size())];
      const auto& candidates = corpus.candidates_for(ex.table.id);
      const auto negatives = sample_negatives(candidates, ex.reference, negatives_k, rng.next());
      Graph<Scalar> g;
      BoundParams<Scalar> p(g, selector.params, /*train=*/true);
      auto loss = selector.loss_var(g, p, ex.table, ex.reference, negatives, vocab);
      loss_sum += static_cast<double>(g.value(loss)(0, 0));
      g.backward(loss);
      p.harvest(grads);
    }
    grads.scale(Scalar(1) / static_cast<Scalar>(cfg.batch_size));
    opt.step(selector.params, grads);
    const double mean_loss = loss_sum / cfg.batch_size;
    detail::check_finite(mean_loss, cfg.stage, step);
    result.losses.push_back(mean_loss);
  }
  return result;
}

struct PipelineConfig {
  ModelConfig model;
  SelectorConfig selector;
  StageConfig gen_ps{Stage::GenPS, 3e-3, 4, 300, 1, FreezePolicy::AllTrainable};
  StageConfig gen_lm{Stage::GenLM, 1e-2, 4, 1000, 1, FreezePolicy::AllTrainable};
  StageConfig ka{Stage::KA, 1e-2, 4, 500, 1, FreezePolicy::AdapterOnly};
  StageConfig finetune{Stage::Finetune, 1e-2, 4, 500, 1, FreezePolicy::AdapterFrozen};
  int prototypes_n = 3;
  int negatives_k = 5;
  int max_target_len = 48;
  std::uint64_t seed = 1;
};

template <class Scalar>
struct PipelineResult {
  Seq2SeqModel<Scalar> model;
  PrototypeSelector<Scalar> selector;
  std::map<std::string, PrototypeSet> prototypes;  // per training table id
  std::vector<std::string> checkpoints;            // written, in stage order
  std::map<std::string, std::vector<double>> loss_traces;  // keyed by stage name
};

namespace detail {

// Targets longer than the budget keep their first tokens and the closing
// <eos>.
inline std::vector<int> clamp_target(std::vector<int> ids, int budget) {
  if (static_cast<int>(ids.size()) > budget) {
    ids.resize(static_cast<std::size_t>(budget));
    ids.back() = Vocab::kEos;
  }
  return ids;
}

inline std::vector<int> encode_tokens(const std::vector<std::string>& tokens, const Vocab& v) {
  std::vector<int> ids;
  ids.reserve(tokens.size() + 1);
  for (const auto& tok : tokens) ids.push_back(v.id(lowercase(tok)));
  return ids;
}

}  // namespace detail

// Teacher-forcing examples for the generation stages: source is the
// prototype-guided prompt, target the lowercased reference.
template <class ProtoLookup>
std::vector<SeqExample> build_generation_examples(const Dataset& data, const ProtoLookup& protos,
                                                  const Vocab& vocab, int max_positions,
                                                  int max_target_len) {
  std::vector<SeqExample> out;
  out.reserve(data.size());
  for (const auto& rec : data) {
    SeqExample ex;
    ex.src = build_lm_input(protos(rec.table.id), rec.table, vocab, max_positions);
    ex.target = vocab.encode(lowercase(rec.reference.text));
    ex.target.push_back(Vocab::kEos);
    ex.target = detail::clamp_target(std::move(ex.target),
                                     std::min(max_target_len, max_positions));
    out.push_back(std::move(ex));
  }
  return out;
}

// Reconstruction examples for the KA stage: the masked prompt alone is the
// source; the unmasked sentence is the target. Pairs that cannot fit the
// position budget even after clamping the target are skipped.
inline std::vector<SeqExample> build_ka_examples(const std::vector<MaskedPrompt>& pairs,
                                                 const Vocab& vocab, int max_positions,
                                                 int max_target_len) {
  std::vector<SeqExample> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    SeqExample ex;
    ex.src = detail::encode_tokens(p.masked_tokens, vocab);
    ex.src.push_back(Vocab::kEos);
    if (static_cast<int>(ex.src.size()) > max_positions) continue;
    ex.target = detail::encode_tokens(p.target_tokens, vocab);
    ex.target.push_back(Vocab::kEos);
    ex.target = detail::clamp_target(std::move(ex.target),
                                     std::min(max_target_len, max_positions));
    out.push_back(std::move(ex));
  }
  return out;
}

// Runs the manifest's stages in order, writing one checkpoint after each.
// With resume=true, a stage whose checkpoint (and, for GEN_PS, prototype
// cache) already exists under out_dir is loaded instead of re-trained;
// because every stage is deterministic, a resumed run reproduces the
// uninterrupted run bitwise. stop_after ends the run early once the named
// stage has completed.
template <class Scalar>
PipelineResult<Scalar> run_pipeline(const RunManifest& manifest, const PipelineConfig& cfg,
                                    const Dataset& train, const PrototypeCorpus& corpus,
                                    const std::vector<MaskedPrompt>& ka_pairs, const Vocab& vocab,
                                    bool resume = false,
                                    std::optional<Stage> stop_after = std::nullopt) {
  namespace fs = std::filesystem;
  if (train.empty()) throw std::runtime_error("pipeline requires a non-empty training set");
  if (manifest.use_pa && ka_pairs.empty()) {
    throw std::runtime_error(
        "knowledge-augmentation pairs are required when the adapter stage is enabled");
  }
  fs::create_directories(manifest.out_dir);

  PipelineResult<Scalar> result;
  result.selector = PrototypeSelector<Scalar>::init(cfg.selector, mix_seed(cfg.seed, "sel.init"));
  result.model = Seq2SeqModel<Scalar>::init(cfg.model, mix_seed(cfg.seed, "gen.init"));

  const std::string proto_cache = manifest.out_dir + "/prototypes.tsv";

  // (a) generation-module pretraining: the prototype-selection task.
  if (manifest.use_pt) {
    const std::string ckpt = manifest.checkpoint_path(Stage::GenPS);
    if (resume && fs::exists(ckpt) && fs::exists(proto_cache)) {
      load_checkpoint_into(result.selector.params, ckpt);
      result.prototypes = load_prototype_cache(proto_cache);
    } else {
      std::vector<SelectorExample> sel_data;
      sel_data.reserve(train.size());
      for (const auto& rec : train) sel_data.push_back({rec.table, rec.reference.text});
      result.loss_traces[to_string(Stage::GenPS)] =
          run_selector_stage(cfg.gen_ps, result.selector, sel_data, corpus, vocab,
                             cfg.negatives_k)
              .losses;
      save_checkpoint(result.selector.params, ckpt);
      // Re-select prototypes once with the trained selector and cache them for
      // every later stage.
      for (const auto& rec : train) {
        if (result.prototypes.count(rec.table.id)) continue;
        result.prototypes.emplace(
            rec.table.id,
            result.selector.select_prototypes(rec.table, corpus.candidates_for(rec.table.id),
                                              cfg.prototypes_n, vocab));
      }
      save_prototype_cache(result.prototypes, proto_cache);
    }
    result.checkpoints.push_back(ckpt);
    if (stop_after == Stage::GenPS) return result;
  }

  auto proto_for = [&result](const std::string& table_id) -> const PrototypeSet& {
    static const PrototypeSet empty;
    auto it = result.prototypes.find(table_id);
    return it == result.prototypes.end() ? empty : it->second;
  };

  const auto gen_examples = build_generation_examples(
      train, proto_for, vocab, cfg.model.max_positions, cfg.max_target_len);

  // (a) generation-module pretraining: the language-modeling task.
  {
    const std::string ckpt = manifest.checkpoint_path(Stage::GenLM);
    if (resume && fs::exists(ckpt)) {
      load_checkpoint_into(result.model.params, ckpt);
    } else {
      result.loss_traces[to_string(Stage::GenLM)] =
          run_stage(cfg.gen_lm, result.model, gen_examples, !manifest.use_pa).losses;
      save_checkpoint(result.model.params, ckpt);
    }
    result.checkpoints.push_back(ckpt);
    if (stop_after == Stage::GenLM) return result;
  }

  // (b) knowledge-augmentation pretraining, adapters only.
  if (manifest.use_pa) {
    const std::string ckpt = manifest.checkpoint_path(Stage::KA);
    if (resume && fs::exists(ckpt)) {
      load_checkpoint_into(result.model.params, ckpt);
    } else {
      const auto ka_examples =
          build_ka_examples(ka_pairs, vocab, cfg.model.max_positions, cfg.max_target_len);
      result.loss_traces[to_string(Stage::KA)] =
          run_stage(cfg.ka, result.model, ka_examples).losses;
      save_checkpoint(result.model.params, ckpt);
    }
    result.checkpoints.push_back(ckpt);
    if (stop_after == Stage::KA) return result;
  }

  // (c) fine-tuning with adapters frozen. With use_pa=false the adapters stay
  // at their zero initialization, an exact identity, so "-PA" differs from the
  // full run only by the skipped KA stage.
  {
    const std::string ckpt = manifest.checkpoint_path(Stage::Finetune);
    if (resume && fs::exists(ckpt)) {
      load_checkpoint_into(result.model.params, ckpt);
    } else {
      result.loss_traces[to_string(Stage::Finetune)] =
          run_stage(cfg.finetune, result.model, gen_examples, !manifest.use_pa).losses;
      save_checkpoint(result.model.params, ckpt);
    }
    result.checkpoints.push_back(ckpt);
  }

  return result;
}

// Greedy generation for a dataset, using cached prototypes where available.
template <class Scalar>
std::vector<std::string> generate_hypotheses(const Seq2SeqModel<Scalar>& model,
                                             const std::map<std::string, PrototypeSet>& prototypes,
                                             const Dataset& data, const Vocab& vocab,
                                             int max_len) {
  std::vector<std::string> out;
  out.reserve(data.size());
  for (const auto& rec : data) {
    static const PrototypeSet empty;
    auto it = prototypes.find(rec.table.id);
    const PrototypeSet& protos = it == prototypes.end() ? empty : it->second;
    const auto src = build_lm_input(protos, rec.table, vocab, model.cfg.max_positions);

    out.push_back(vocab.decode(model.greedy_decode(src, max_len)));
  }
  return out;
}

}  // namespace adaptgen
