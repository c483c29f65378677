// Acceptance suite: one gating check per core guarantee, each printed as a
// single [PASS]/[FAIL] line with its measured runtime, plus a non-gating
// directional ablation report. Exits nonzero if any gating check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "adaptgen/checkpoint.hpp"
#include "adaptgen/metrics.hpp"
#include "adaptgen/model.hpp"
#include "adaptgen/optimizer.hpp"
#include "adaptgen/prompt.hpp"
#include "adaptgen/rng.hpp"
#include "adaptgen/selector.hpp"
#include "adaptgen/synth.hpp"
#include "adaptgen/tokenizer.hpp"
#include "adaptgen/trainer.hpp"
#include "metric_oracle.hpp"

using namespace adaptgen;
namespace fs = std::filesystem;

namespace {

struct Harness {
  int failures = 0;

  // Runs one gating check. `body` returns a detail string on success and
  // throws (or calls fail()) otherwise. A check that overruns its time budget
  // fails even if its assertions held.
  void run(const std::string& name, double budget_seconds,
           const std::function<std::string()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      detail = body();
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ok && secs > budget_seconds) {
      ok = false;
      detail = "exceeded time budget of " + std::to_string(budget_seconds) + " s";
    }
    std::ostringstream line;
    line << (ok ? "[PASS] " : "[FAIL] ") << name << " (" << detail << "; "
         << std::fixed << std::setprecision(2) << secs << " s)";
    std::cout << line.str() << std::endl;
    if (!ok) ++failures;
  }
};

[[noreturn]] void fail(const std::string& why) { throw std::runtime_error(why); }

void require(bool cond, const std::string& why) {
  if (!cond) fail(why);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << v;
  return os.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

// Shared toy domain: synthetic tables + corpus, vocabulary, and a small
// pipeline configuration sized for CPU-minute budgets.
struct ToyDomain {
  SynthData data;
  Vocab vocab;
  PipelineConfig cfg;
  std::vector<MaskedPrompt> ka_pairs;

  static ToyDomain make(int n_tables, std::uint64_t seed) {
    SynthConfig sc;
    sc.n_tables = n_tables;
    sc.seed = seed;
    SynthData data = make_synthetic_domain(sc);
    std::vector<std::string> texts;
    for (const auto& rec : data.dataset) {
      texts.push_back(lowercase(linearize_table(rec.table)));
      texts.push_back(lowercase(rec.reference.text));
    }
    for (const auto& [id, sents] : data.corpus.sentences) {
      for (const auto& s : sents) texts.push_back(lowercase(s));
    }
    Vocab vocab = Vocab::build(texts, 1);

    PipelineConfig cfg;
    cfg.model.vocab_size = static_cast<int>(vocab.size());
    cfg.model.d_model = 16;
    cfg.model.n_heads = 2;
    cfg.model.n_encoder_layers = 1;
    cfg.model.n_decoder_layers = 1;
    cfg.model.d_ffn = 32;
    cfg.model.d_bottleneck = 4;
    cfg.model.max_positions = 96;
    cfg.selector.vocab_size = cfg.model.vocab_size;
    cfg.selector.d_model = 8;
    cfg.selector.n_heads = 1;
    cfg.selector.n_layers = 0;
    cfg.selector.d_ffn = 16;
    cfg.selector.max_positions = 96;
    cfg.gen_ps.max_steps = 15;
    cfg.gen_ps.batch_size = 2;
    cfg.gen_lm.max_steps = 150;
    cfg.gen_lm.batch_size = 4;
    cfg.gen_lm.learning_rate = 1e-2;
    cfg.ka.max_steps = 40;
    cfg.ka.batch_size = 4;
    cfg.ka.learning_rate = 1e-2;
    cfg.finetune.max_steps = 80;
    cfg.finetune.batch_size = 4;
    cfg.finetune.learning_rate = 1e-2;
    cfg.prototypes_n = 2;
    cfg.negatives_k = 3;

    std::vector<Table> tables;
    for (const auto& rec : data.dataset) tables.push_back(rec.table);
    auto ka = build_augmentation_pairs(data.corpus, tables);
    return ToyDomain{std::move(data), std::move(vocab), cfg, std::move(ka)};
  }

  std::vector<SeqExample> lm_examples() const {
    const PrototypeSet empty;
    return build_generation_examples(
        data.dataset, [&](const std::string&) -> const PrototypeSet& { return empty; }, vocab,
        cfg.model.max_positions, cfg.max_target_len);
  }
};

// ---------------------------------------------------------------------------
// 1. Adapter identity: with zero-initialized up-projections, a model with
// adapters produces the same logits as an adapter-free model sharing every
// other tensor.
std::string check_adapter_identity() {
  ModelConfig with;
  with.vocab_size = 64;
  with.d_model = 32;
  with.n_heads = 2;
  with.n_encoder_layers = 2;
  with.n_decoder_layers = 2;
  with.d_ffn = 64;
  with.d_bottleneck = 8;
  with.adapter_placement = AdapterPlacement::EveryLayer;
  with.max_positions = 32;
  ModelConfig without = with;
  without.adapter_placement = AdapterPlacement::None;

  auto adapted = Seq2SeqModel<float>::init(with, 99);
  auto plain = Seq2SeqModel<float>::init(without, 7);
  for (auto& t : plain.params.tensors()) t.value = adapted.params.at(t.name);

  // init() zero-fills every up-projection; make that explicit here.
  for (const auto& t : adapted.params.tensors()) {
    if (is_adapter_tensor(t.name) && t.name.ends_with(".w_up")) {
      require(t.value.isZero(0.0f), "up-projection not zero at init: " + t.name);
    }
  }

  DeterministicRng rng(4242);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::vector<int> src(1 + rng.below(10)), tgt(1 + rng.below(6));
    for (auto& id : src) id = static_cast<int>(Vocab::kNumReserved + rng.below(57));
    tgt[0] = Vocab::kBos;
    for (std::size_t k = 1; k < tgt.size(); ++k) {
      tgt[k] = static_cast<int>(Vocab::kNumReserved + rng.below(57));
    }
    const auto a = adapted.logits(src, tgt);
    const auto b = plain.logits(src, tgt);
    worst = std::max(worst, static_cast<double>((a - b).cwiseAbs().maxCoeff()));
  }
  require(worst < 1e-6, "max |logit difference| = " + fmt(worst));
  return "max |logit difference| = " + fmt(worst) + " over 100 inputs, tolerance 1e-6";
}

// ---------------------------------------------------------------------------
// 2. Freeze soundness: the adapter-only stage leaves every non-adapter tensor
// bitwise unchanged, and fine-tuning leaves every adapter tensor bitwise
// unchanged.
std::string check_freeze_soundness() {
  ToyDomain d = ToyDomain::make(8, 11);
  auto model = Seq2SeqModel<float>::init(d.cfg.model, 21);
  const auto examples = d.lm_examples();
  const auto ka_examples =
      build_ka_examples(d.ka_pairs, d.vocab, d.cfg.model.max_positions, d.cfg.max_target_len);

  auto snapshot = [&](bool adapters) {
    std::map<std::string, std::uint64_t> out;
    for (const auto& t : model.params.tensors()) {
      if (is_adapter_tensor(t.name) == adapters) out[t.name] = model.params.checksum(t.name);
    }
    return out;
  };

  StageConfig warm{Stage::GenLM, 1e-2, 2, 15, 5, FreezePolicy::AllTrainable};
  run_stage(warm, model, examples);

  const auto backbone_before = snapshot(false);
  const auto adapters_before = snapshot(true);
  StageConfig ka{Stage::KA, 1e-2, 2, 15, 5, FreezePolicy::AdapterOnly};
  run_stage(ka, model, ka_examples);
  require(snapshot(false) == backbone_before,
          "a non-adapter tensor changed during the adapter-only stage");
  require(snapshot(true) != adapters_before, "no adapter tensor changed during training");

  const auto adapters_mid = snapshot(true);
  StageConfig ft{Stage::Finetune, 1e-2, 2, 15, 5, FreezePolicy::AdapterFrozen};
  run_stage(ft, model, examples);
  require(snapshot(true) == adapters_mid, "an adapter tensor changed during fine-tuning");
  require(snapshot(false) != backbone_before, "no backbone tensor changed during fine-tuning");
  return "per-tensor checksums bitwise stable across both freeze policies";
}

// ---------------------------------------------------------------------------
// 3. Gradient correctness: analytic gradients vs central finite differences
// on a model small enough to sweep every parameter.
std::string check_gradients() {
  ModelConfig mc;
  mc.vocab_size = 8;
  mc.d_model = 4;
  mc.n_heads = 1;
  mc.n_encoder_layers = 1;
  mc.n_decoder_layers = 1;
  mc.d_ffn = 4;
  mc.d_bottleneck = 2;
  mc.max_positions = 8;
  auto model = Seq2SeqModel<double>::init(mc, 31);
  require(model.params.parameter_count() <= 500,
          "probe model has " + std::to_string(model.params.parameter_count()) + " parameters");

  const std::vector<int> src = {7, 3, 5, 4};
  const std::vector<int> tgt_in = {Vocab::kBos, 6, 3};
  const std::vector<int> target = {6, 3, Vocab::kEos};

  auto loss_value = [&]() {
    Graph<double> g;
    BoundParams<double> p(g, model.params, /*train=*/false);
    return g.value(sequence_cross_entropy(g, model.forward(g, p, src, tgt_in), target))(0, 0);
  };

  GradMap<double> grads;
  {
    Graph<double> g;
    BoundParams<double> p(g, model.params, /*train=*/true);
    auto loss = sequence_cross_entropy(g, model.forward(g, p, src, tgt_in), target);
    g.backward(loss);
    p.harvest(grads);
  }

  const double h = 1e-5;
  double worst = 0.0;
  std::size_t swept = 0;
  for (auto& t : model.params.tensors()) {
    const auto* g = grads.find(t.name);
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.value.cols(); ++c) {
        const double saved = t.value(r, c);
        t.value(r, c) = saved + h;
        const double up = loss_value();
        t.value(r, c) = saved - h;
        const double down = loss_value();
        t.value(r, c) = saved;
        const double fd = (up - down) / (2 * h);
        const double an = g ? (*g)(r, c) : 0.0;
        const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1.0});
        worst = std::max(worst, rel);
        ++swept;
      }
    }
  }
  require(worst < 1e-4, "max relative gradient error = " + fmt(worst));
  return "max relative error = " + fmt(worst) + " across " + std::to_string(swept) +
         " parameters, tolerance 1e-4";
}

// ---------------------------------------------------------------------------
// 4. Overfit oracle: a d_model-32, 2+2-layer model memorizes 8 synthetic
// pairs within 2000 steps and greedy decoding reproduces every target.
std::string check_overfit() {
  ToyDomain d = ToyDomain::make(8, 17);
  ModelConfig mc = d.cfg.model;
  mc.d_model = 32;
  mc.n_heads = 2;
  mc.n_encoder_layers = 2;
  mc.n_decoder_layers = 2;
  mc.d_ffn = 64;
  mc.d_bottleneck = 8;
  auto model = Seq2SeqModel<float>::init(mc, 41);
  const auto examples = d.lm_examples();
  require(examples.size() == 8, "expected 8 training pairs");

  AdamOptimizer<float> opt(1e-2f);
  double loss = 1e9;
  int steps = 0;
  for (; steps < 2000 && loss >= 0.05; ++steps) {
    GradMap<float> grads;
    double loss_sum = 0.0;
    for (const auto& ex : examples) {
      std::vector<int> tgt_in{Vocab::kBos};
      tgt_in.insert(tgt_in.end(), ex.target.begin(), ex.target.end() - 1);
      Graph<float> g;
      BoundParams<float> p(g, model.params, /*train=*/true);
      auto l = sequence_cross_entropy(g, model.forward(g, p, ex.src, tgt_in), ex.target);
      loss_sum += static_cast<double>(g.value(l)(0, 0));
      g.backward(l);
      p.harvest(grads);
    }
    grads.scale(1.0f / static_cast<float>(examples.size()));
    opt.step(model.params, grads);
    loss = loss_sum / static_cast<double>(examples.size());
  }
  require(loss < 0.1, "per-token loss " + fmt(loss) + " after " + std::to_string(steps) + " steps");

  int exact = 0;
  for (const auto& ex : examples) {
    const auto decoded = model.greedy_decode(ex.src, static_cast<int>(ex.target.size()) + 4);
    exact += decoded == ex.target ? 1 : 0;
  }
  require(exact == 8, "greedy decode reproduced only " + std::to_string(exact) + "/8 targets");
  return "loss " + fmt(loss) + " after " + std::to_string(steps) +
         " steps, 8/8 targets decoded exactly";
}

// ---------------------------------------------------------------------------
// 5. Prototype-selection oracle: the top-n choice equals exhaustive
// enumeration of all size-n subsets by score sum, ties resolved to the
// lexicographically smallest index set.
std::string check_selection_oracle() {
  DeterministicRng rng(55);
  int cases = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng.below(8);
    const int n = 1 + static_cast<int>(rng.below(3));
    std::vector<std::string> candidates(m);
    std::vector<double> scores(m);
    for (std::size_t i = 0; i < m; ++i) {
      candidates[i] = "cand " + std::to_string(i);
      // coarse grid so ties are frequent
      scores[i] = 0.5 * static_cast<double>(rng.below(5));
    }

    const auto got = PrototypeSelector<float>::rank_by_scores("t", candidates, scores, n);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(n), m);
    require(got.members.size() == k, "selection size mismatch");

    double best_sum = -1e18;
    std::vector<std::vector<std::size_t>> argmax;
    for (std::uint32_t bits = 0; bits < (1u << m); ++bits) {
      if (static_cast<std::size_t>(__builtin_popcount(bits)) != k) continue;
      double sum = 0.0;
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < m; ++i) {
        if (bits & (1u << i)) {
          sum += scores[i];
          idx.push_back(i);
        }
      }
      if (sum > best_sum + 1e-12) {
        best_sum = sum;
        argmax = {idx};
      } else if (std::abs(sum - best_sum) <= 1e-12) {
        argmax.push_back(idx);
      }
    }

    double got_sum = 0.0;
    std::vector<std::size_t> got_idx;
    for (const auto& mem : got.members) {
      got_sum += mem.score;
      got_idx.push_back(mem.corpus_index);
    }
    std::sort(got_idx.begin(), got_idx.end());
    require(std::abs(got_sum - best_sum) <= 1e-12,
            "selected score sum differs from the exhaustive optimum");
    require(got_idx == *std::min_element(argmax.begin(), argmax.end()),
            "tie not resolved to the lowest corpus indices");
    for (std::size_t i = 1; i < got.members.size(); ++i) {
      require(got.members[i - 1].score >= got.members[i].score, "scores not non-increasing");
    }
    ++cases;
  }

  // End-to-end spot checks through a real scorer: the selected subset matches
  // exhaustive enumeration over the model's own candidate scores.
  ToyDomain d = ToyDomain::make(6, 23);
  auto selector = PrototypeSelector<float>::init(d.cfg.selector, 67);
  for (const auto& rec : d.data.dataset) {
    const auto& cands = d.data.corpus.candidates_for(rec.table.id);
    const auto got = selector.select_prototypes(rec.table, cands, 2, d.vocab);
    std::vector<double> scores(cands.size());
    for (std::size_t i = 0; i < cands.size(); ++i) {
      scores[i] = selector.score_candidate(rec.table, cands[i], d.vocab);
    }
    double got_sum = 0.0;
    for (const auto& mem : got.members) got_sum += mem.score;
    double best = -1e18;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      for (std::size_t j = i + 1; j < cands.size(); ++j) {
        best = std::max(best, scores[i] + scores[j]);
      }
    }
    require(std::abs(got_sum - best) <= 1e-12, "model-scored selection is not optimal");
    ++cases;
  }
  return std::to_string(cases) + " cases matched exhaustive subset enumeration";
}

// ---------------------------------------------------------------------------
// 6. Hinge-loss contract: zero exactly when every margin is >= 1, the
// hand-computed sum otherwise, and the graph-built loss agrees with the
// score-level formula.
std::string check_hinge_contract() {
  DeterministicRng rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    const double pos = rng.symmetric(3.0);
    std::vector<double> negs(1 + rng.below(6));
    bool all_satisfied = true;
    double by_hand = 0.0;
    for (auto& v : negs) {
      v = rng.symmetric(3.0);
      const double margin = pos - v;
      if (margin < 1.0) {
        all_satisfied = false;
        by_hand += 1.0 - margin;
      }
    }
    const double got = hinge_ranking_loss(pos, negs);
    if (all_satisfied) {
      require(got == 0.0, "loss is nonzero although every margin is >= 1");
    } else {
      require(std::abs(got - by_hand) <= 1e-12, "loss differs from the hand-computed sum");
      require(got > 0.0, "violated margins must give a positive loss");
    }
  }

  // The differentiable form agrees with the score-level formula on a real
  // scorer.
  ToyDomain d = ToyDomain::make(4, 29);
  SelectorConfig sc = d.cfg.selector;
  auto selector = PrototypeSelector<double>::init(sc, 73);
  for (const auto& rec : d.data.dataset) {
    const auto& cands = d.data.corpus.candidates_for(rec.table.id);
    const std::vector<std::string> negs(cands.begin(), cands.begin() + 2);
    const double graph_loss =
        selector.prototype_selection_loss(rec.table, rec.reference.text, negs, d.vocab);
    std::vector<double> neg_scores;
    for (const auto& b : negs) neg_scores.push_back(selector.score_candidate(rec.table, b, d.vocab));
    const double formula = hinge_ranking_loss(
        selector.score_candidate(rec.table, rec.reference.text, d.vocab), neg_scores);
    require(std::abs(graph_loss - formula) <= 1e-9, "graph loss differs from the formula");
  }
  return "100 random score vectors + graph/formula agreement";
}

// ---------------------------------------------------------------------------
// 7. Mask round-trip: every emitted masked prompt unmasks back to its target,
// and no target contains the mask token.
std::string check_mask_round_trip() {
  SynthConfig sc;
  sc.n_tables = 100;  // 5 corpus sentences per table -> 500 sentences
  sc.seed = 83;
  const SynthData data = make_synthetic_domain(sc);
  std::size_t sentences = 0;
  for (const auto& [id, sents] : data.corpus.sentences) sentences += sents.size();
  require(sentences >= 500, "corpus has only " + std::to_string(sentences) + " sentences");

  std::vector<Table> tables;
  for (const auto& rec : data.dataset) tables.push_back(rec.table);
  const auto pairs = build_augmentation_pairs(data.corpus, tables);
  require(!pairs.empty(), "no masked prompts were emitted");
  for (const auto& p : pairs) {
    require(unmask(p) == p.target_tokens, "unmask does not reproduce the target");
    for (const auto& tok : p.target_tokens) {
      require(tok != "<mask>", "a reconstruction target contains <mask>");
    }
    require(std::count(p.masked_tokens.begin(), p.masked_tokens.end(), "<mask>") ==
                static_cast<long>(p.span_texts.size()),
            "mask count does not match recorded span count");
  }
  return std::to_string(pairs.size()) + " prompts from " + std::to_string(sentences) +
         " sentences all round-tripped";
}

// ---------------------------------------------------------------------------
// 8. Metric oracles: implementation matches the brute-force oracles on a
// 50-case fixture, plus the fixed anchor values.
std::string check_metric_oracles() {
  const oracle::ToyCase tc = oracle::random_corpus(123, 50);

  const double bleu_got = bleu4(tc.hyps, tc.refs);
  const double bleu_want = oracle::bleu(tc.hyps, tc.refs);
  require(std::abs(bleu_got - bleu_want) < 1e-6,
          "corpus bleu " + fmt(bleu_got) + " vs oracle " + fmt(bleu_want));

  const PRF r_got = rouge4(tc.hyps, tc.refs);
  const PRF r_want = oracle::rouge4(tc.hyps, tc.refs);
  require(std::abs(r_got.precision - r_want.precision) < 1e-6 &&
              std::abs(r_got.recall - r_want.recall) < 1e-6 &&
              std::abs(r_got.f1 - r_want.f1) < 1e-6,
          "rouge components differ from the oracle");

  for (std::size_t i = 0; i < tc.hyps.size(); ++i) {
    const PRF got = parent_example(tc.hyps[i], tc.refs[i], tc.tables[i]);
    const PRF want = oracle::parent(tc.hyps[i], tc.refs[i], tc.tables[i], 0.5);
    require(std::abs(got.precision - want.precision) < 1e-6 &&
                std::abs(got.recall - want.recall) < 1e-6 &&
                std::abs(got.f1 - want.f1) < 1e-6,
            "grounded-fidelity case " + std::to_string(i) + " differs from the oracle");
  }

  const std::vector<std::string> same = {"the actor was born in new york"};
  require(std::abs(bleu4(same, same) - 100.0) < 1e-9, "bleu of identical corpora must be 100");
  require(bleu4({"aa bb cc dd"}, {"xx yy zz ww"}) == 0.0, "bleu of disjoint corpora must be 0");
  Table t{"t", {{"name", "alan"}}};
  const PRF empty_hyp = parent_example("", "alan was here", t);
  require(empty_hyp.precision == 0.0 && empty_hyp.recall == 0.0 && empty_hyp.f1 == 0.0,
          "empty hypothesis must score 0");
  return "50-case fixture within 1e-6 of the oracles, anchors exact";
}

// ---------------------------------------------------------------------------
// 9. Pipeline determinism: two complete runs from the same seed produce
// bitwise-identical checkpoints and identical evaluation reports.
std::string check_pipeline_determinism() {
  ToyDomain d = ToyDomain::make(8, 37);

  auto run_once = [&](const std::string& dir) {
    RunManifest manifest;
    manifest.out_dir = dir;
    auto result =
        run_pipeline<float>(manifest, d.cfg, d.data.dataset, d.data.corpus, d.ka_pairs, d.vocab);
    std::vector<std::uint64_t> sums;
    for (const auto& c : result.checkpoints) sums.push_back(file_checksum(c));

    const auto hyps =
        generate_hypotheses(result.model, result.prototypes, d.data.dataset, d.vocab, 32);
    std::vector<std::string> refs;
    std::vector<Table> tables;
    for (const auto& rec : d.data.dataset) {
      refs.push_back(lowercase(rec.reference.text));
      tables.push_back(rec.table);
    }
    return std::make_pair(sums, evaluate_all(hyps, refs, tables));
  };

  TempDir a("acc_determinism_a"), b("acc_determinism_b");
  const auto [sums_a, report_a] = run_once(a.str());
  const auto [sums_b, report_b] = run_once(b.str());
  require(sums_a.size() == 4, "expected four stage checkpoints");
  require(sums_a == sums_b, "checkpoint bytes differ between identical runs");
  require(report_a.bleu4 == report_b.bleu4 && report_a.rouge4_f1 == report_b.rouge4_f1 &&
              report_a.parent_f1 == report_b.parent_f1 &&
              report_a.rouge4_precision == report_b.rouge4_precision &&
              report_a.rouge4_recall == report_b.rouge4_recall &&
              report_a.parent_precision == report_b.parent_precision &&
              report_a.parent_recall == report_b.parent_recall,
          "evaluation reports differ between identical runs");
  return "4 checkpoints bitwise identical, reports identical (bleu " + fmt(report_a.bleu4) + ")";
}

// ---------------------------------------------------------------------------
// 10. Directional ablation, reported but not asserted: median corpus BLEU
// over 5 seeds for the full pipeline vs the no-adapter row vs the
// backbone-only row.
void report_directional_ablation() {
  const auto t0 = std::chrono::steady_clock::now();
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };

  std::map<std::string, std::vector<double>> bleus;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ToyDomain d = ToyDomain::make(10, 100 + seed);
    d.cfg.seed = seed;
    d.cfg.gen_ps.seed = d.cfg.gen_lm.seed = d.cfg.ka.seed = d.cfg.finetune.seed = seed;

    std::vector<std::string> refs;
    std::vector<Table> tables;
    for (const auto& rec : d.data.dataset) {
      refs.push_back(lowercase(rec.reference.text));
      tables.push_back(rec.table);
    }

    for (const auto& [row, use_pa, use_pt] :
         std::vector<std::tuple<std::string, bool, bool>>{
             {"full", true, true}, {"-pa", false, true}, {"-pa&pt", false, false}}) {
      TempDir dir("acc_ablate_" + std::to_string(seed) + "_" + std::to_string(use_pa) +
                  std::to_string(use_pt));
      RunManifest manifest;
      manifest.use_pa = use_pa;
      manifest.use_pt = use_pt;
      manifest.out_dir = dir.str();
      auto result =
          run_pipeline<float>(manifest, d.cfg, d.data.dataset, d.data.corpus, d.ka_pairs, d.vocab);
      const auto hyps =
          generate_hypotheses(result.model, result.prototypes, d.data.dataset, d.vocab, 32);
      bleus[row].push_back(bleu4(hyps, refs));
    }
  }

  const double full = median(bleus["full"]);
  const double no_pa = median(bleus["-pa"]);
  const double backbone = median(bleus["-pa&pt"]);
  const bool ordered = full >= no_pa && no_pa >= backbone;
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream line;
  line << "[REPORT] directional-ablation (non-gating): median bleu over 5 seeds: full="
       << std::fixed << std::setprecision(2) << full << " -pa=" << no_pa
       << " -pa&pt=" << backbone << "; expected ordering full >= -pa >= -pa&pt "
       << (ordered ? "holds" : "does NOT hold") << " (" << secs << " s)";
  std::cout << line.str() << std::endl;
}

}  // namespace

int main() {
  std::cout << "acceptance suite" << std::endl;
  Harness h;
  h.run("adapter-identity", 10.0, check_adapter_identity);
  h.run("freeze-soundness", 120.0, check_freeze_soundness);
  h.run("gradient-correctness", 60.0, check_gradients);
  h.run("overfit-oracle", 300.0, check_overfit);
  h.run("prototype-selection-oracle", 10.0, check_selection_oracle);
  h.run("hinge-loss-contract", 5.0, check_hinge_contract);
  h.run("mask-round-trip", 10.0, check_mask_round_trip);
  h.run("metric-oracles", 30.0, check_metric_oracles);
  h.run("pipeline-determinism", 600.0, check_pipeline_determinism);
  report_directional_ablation();
  if (h.failures > 0) {
    std::cout << h.failures << " gating check(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all gating checks passed" << std::endl;
  return 0;
}
