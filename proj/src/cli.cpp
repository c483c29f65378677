#include "adaptgen/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "adaptgen/config.hpp"
#include "adaptgen/metrics.hpp"
#include "adaptgen/synth.hpp"
#include "adaptgen/trainer.hpp"

namespace adaptgen {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kVersion = "adaptgen 1.0.0";

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(f, line)) lines.push_back(line);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

void write_lines(const std::vector<std::string>& lines, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write file: " + path);
  for (const auto& l : lines) f << l << '\n';
}

// All prepared inputs for one run, loaded from (or materialized into)
// cfg.out_dir.
struct Workspace {
  Dataset train, validation, test;
  PrototypeCorpus corpus;
  std::optional<Vocab> vocab;
  std::vector<MaskedPrompt> ka_pairs;
};

struct Paths {
  std::string train, validation, test, corpus, vocab, ka_pairs;
  explicit Paths(const std::string& out_dir)
      : train(out_dir + "/train.tsv"),
        validation(out_dir + "/validation.tsv"),
        test(out_dir + "/test.tsv"),
        corpus(out_dir + "/corpus.tsv"),
        vocab(out_dir + "/vocab.txt"),
        ka_pairs(out_dir + "/ka_pairs.tsv") {}
};

bool is_prepared(const Paths& p) {
  return fs::exists(p.train) && fs::exists(p.test) && fs::exists(p.corpus) &&
         fs::exists(p.vocab) && fs::exists(p.ka_pairs);
}

// Splits the dataset. Datasets large enough for the standard protocol use the
// nested few-shot split; smaller (toy/synthetic) datasets train and evaluate
// on all records.
void split_dataset(const RunConfig& cfg, const Dataset& all, Workspace& ws) {
  const std::size_t need =
      static_cast<std::size_t>(cfg.fewshot_size) + static_cast<std::size_t>(cfg.validation_size);
  if (all.size() >= need) {
    auto split = make_fewshot_split(all, cfg.fewshot_size, cfg.split_seed,
                                    static_cast<std::size_t>(cfg.validation_size));
    ws.train = std::move(split.train);
    ws.validation = std::move(split.validation);
    ws.test = std::move(split.test);
  } else {
    ws.train = all;
    ws.validation = all;
    ws.test = all;
  }
}

Workspace prepare_workspace(const RunConfig& cfg) {
  if (cfg.dataset_path.empty() || cfg.corpus_path.empty()) {
    throw std::runtime_error("config error: data.dataset and data.corpus paths are required");
  }
  Workspace ws;
  ws.corpus = load_corpus(cfg.corpus_path);
  split_dataset(cfg, load_dataset(cfg.dataset_path), ws);

  std::vector<std::string> vocab_texts;
  for (const auto& rec : ws.train) {
    vocab_texts.push_back(lowercase(linearize_table(rec.table)));
    vocab_texts.push_back(lowercase(rec.reference.text));
  }
  for (const auto& [id, sentences] : ws.corpus.sentences) {
    for (const auto& s : sentences) vocab_texts.push_back(lowercase(s));
  }
  ws.vocab = Vocab::build(vocab_texts, cfg.vocab_min_count);

  std::vector<Table> tables;
  tables.reserve(ws.train.size());
  for (const auto& rec : ws.train) tables.push_back(rec.table);
  ws.ka_pairs = build_augmentation_pairs(ws.corpus, tables);

  fs::create_directories(cfg.out_dir);
  const Paths p(cfg.out_dir);
  save_dataset(ws.train, p.train);
  save_dataset(ws.validation, p.validation);
  save_dataset(ws.test, p.test);
  save_corpus(ws.corpus, p.corpus);
  ws.vocab->save(p.vocab);
  save_augmentation_pairs(ws.ka_pairs, p.ka_pairs);
  return ws;
}

Workspace load_workspace(const RunConfig& cfg) {
  const Paths p(cfg.out_dir);
  if (!is_prepared(p)) return prepare_workspace(cfg);
  Workspace ws;
  ws.train = load_dataset(p.train);
  ws.validation = load_dataset(p.validation);
  ws.test = load_dataset(p.test);
  ws.corpus = load_corpus(p.corpus);
  ws.vocab = Vocab::load(p.vocab);
  ws.ka_pairs = load_augmentation_pairs(p.ka_pairs);
  return ws;
}

PipelineConfig resolved_pipeline_config(const RunConfig& cfg, const Vocab& vocab) {
  PipelineConfig pc = cfg.pipeline;
  pc.model.vocab_size = static_cast<int>(vocab.size());
  pc.selector.vocab_size = static_cast<int>(vocab.size());
  return pc;
}

PipelineResult<float> run_stages(const RunConfig& cfg, const Workspace& ws,
                                 std::optional<Stage> stop_after, bool resume) {
  RunManifest manifest{cfg.use_pa, cfg.use_pt, cfg.out_dir};
  const auto pc = resolved_pipeline_config(cfg, *ws.vocab);
  return run_pipeline<float>(manifest, pc, ws.train, ws.corpus, ws.ka_pairs, *ws.vocab, resume,
                             stop_after);
}

void print_checkpoint_summary(const PipelineResult<float>& result) {
  for (const auto& path : result.checkpoints) {
    std::cout << "checkpoint " << path << " checksum " << std::hex << file_checksum(path)
              << std::dec << '\n';
  }
}

const Dataset& pick_split(const Workspace& ws, const std::string& name) {
  if (name == "train") return ws.train;
  if (name == "validation") return ws.validation;
  if (name == "test") return ws.test;
  throw std::runtime_error("unknown split: " + name);
}

json metric_json(const MetricReport& r) {
  return json{{"bleu4", r.bleu4},
              {"rouge4_precision", r.rouge4_precision},
              {"rouge4_recall", r.rouge4_recall},
              {"rouge4_f1", r.rouge4_f1},
              {"parent_precision", r.parent_precision},
              {"parent_recall", r.parent_recall},
              {"parent_f1", r.parent_f1},
              {"n_examples", r.n_examples}};
}

void write_report(const json& doc, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write report: " + path);
  f << doc.dump(2) << '\n';
}

json evaluate_files(const std::string& hyp_path, const std::string& ref_path,
                    const std::string& tables_path, const RunConfig* cfg_echo) {
  const auto hyps = read_lines(hyp_path);
  const auto refs = read_lines(ref_path);
  const auto records = load_dataset(tables_path);
  if (hyps.size() != refs.size() || hyps.size() != records.size()) {
    throw std::runtime_error("evaluate: input lengths differ: " + std::to_string(hyps.size()) +
                             " hypotheses, " + std::to_string(refs.size()) + " references, " +
                             std::to_string(records.size()) + " tables");
  }
  std::vector<Table> tables;
  tables.reserve(records.size());
  for (const auto& rec : records) tables.push_back(rec.table);

  const MetricReport report = evaluate_all(hyps, refs, tables);
  int supported = 0, contradicted = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const auto eo = entity_overlap_report(hyps[i], tables[i]);
    supported += eo.supported;
    contradicted += eo.contradicted;
  }

  json doc;
  doc["metrics"] = metric_json(report);
  doc["entity_overlap"] = {{"supported", supported}, {"contradicted", contradicted}};
  doc["parent"] = {{"lambda", ParentConfig{}.lambda},
                   {"entailment", "word_overlap"},
                   {"note", "lambda and the entailment model follow the metric's source "
                            "conventions, not this system's own results"}};
  doc["inputs"] = {
      {"hypotheses", {{"path", hyp_path}, {"fnv1a", file_checksum(hyp_path)}}},
      {"references", {{"path", ref_path}, {"fnv1a", file_checksum(ref_path)}}},
      {"tables", {{"path", tables_path}, {"fnv1a", file_checksum(tables_path)}}}};
  if (cfg_echo) doc["config"] = json::parse(run_config_json(*cfg_echo));
  return doc;
}

struct GeneratedFiles {
  std::string hyp, ref, tables;
};

GeneratedFiles generate_split(const RunConfig& cfg, const Workspace& ws,
                              const PipelineResult<float>& result, const std::string& split) {
  const Dataset& data = pick_split(ws, split);
  const auto hyps =
      generate_hypotheses(result.model, result.prototypes, data, *ws.vocab, cfg.max_decode_len);
  std::vector<std::string> refs;
  refs.reserve(data.size());
  for (const auto& rec : data) refs.push_back(lowercase(rec.reference.text));

  GeneratedFiles files{cfg.out_dir + "/hyps_" + split + ".txt",
                       cfg.out_dir + "/refs_" + split + ".txt",
                       cfg.out_dir + "/tables_" + split + ".tsv"};
  write_lines(hyps, files.hyp);
  write_lines(refs, files.ref);
  save_dataset(data, files.tables);
  return files;
}

int classify_exit(const std::exception& e) {
  const std::string what = e.what();
  const char* category = "runtime";
  if (what.find("config error") != std::string::npos) category = "config";
  else if (what.find("cannot open") != std::string::npos ||
           what.find("cannot write") != std::string::npos) category = "io";
  else if (what.find("parse error") != std::string::npos ||
           what.find("checkpoint") != std::string::npos) category = "data";
  std::cerr << "error [" << category << "]: " << what << '\n';
  return 1;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Few-shot table-to-text generation with prototype selection and "
               "adapter-based knowledge augmentation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(0, 1);

  std::string config_path;
  CliOverrides over;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run-config JSON file");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { over.seed = v; }, "Master seed for all stages");
    cmd->add_flag_callback("--no-pa", [&] { over.no_pa = true; },
                           "Disable the knowledge adapters (skip the KA stage)");
    cmd->add_flag_callback("--no-pt", [&] { over.no_pt = true; },
                           "Disable the prototype selector (skip GEN_PS, empty prototypes)");
    cmd->add_option_function<std::string>(
        "--out", [&](const std::string& v) { over.out_dir = v; }, "Output directory");
    cmd->add_option_function<int>(
        "--prototypes-n", [&](int v) { over.prototypes_n = v; }, "Prototypes per table");
    cmd->add_option_function<int>(
        "--negatives-k", [&](int v) { over.negatives_k = v; }, "Negatives per ranking example");
  };

  auto* synth = app.add_subcommand("synth", "Write a deterministic synthetic dataset and corpus");
  int synth_tables = 30, synth_distractors = 2;
  std::uint64_t synth_seed = 1;
  std::string synth_out = "data";
  synth->add_option("--tables", synth_tables, "Number of tables");
  synth->add_option("--distractors", synth_distractors, "Distractor sentences per table");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--out", synth_out, "Output directory");

  auto* prepare = app.add_subcommand("prepare", "Split data, build the vocabulary and KA pairs");
  add_common(prepare);
  auto* pretrain_gen =
      app.add_subcommand("pretrain-gen", "Generation-module pretraining (selection + LM tasks)");
  add_common(pretrain_gen);
  auto* pretrain_ka =
      app.add_subcommand("pretrain-ka", "Knowledge-augmentation pretraining (adapters only)");
  add_common(pretrain_ka);
  auto* finetune = app.add_subcommand("finetune", "Fine-tune with adapters frozen");
  add_common(finetune);

  auto* generate = app.add_subcommand("generate", "Greedy-decode hypotheses for a split");
  add_common(generate);
  std::string gen_split = "test";
  generate->add_option("--split", gen_split, "train|validation|test")
      ->check(CLI::IsMember({"train", "validation", "test"}));

  auto* evaluate = app.add_subcommand("evaluate", "Score hypotheses against references and tables");
  add_common(evaluate);
  std::string hyp_path, ref_path, tables_path, report_path = "report.json";
  evaluate->add_option("--hyp", hyp_path, "Hypotheses, one per line")->required();
  evaluate->add_option("--ref", ref_path, "References, one per line")->required();
  evaluate->add_option("--tables", tables_path, "Tables in dataset format")->required();
  evaluate->add_option("--report", report_path, "Report output path");

  auto* ablate = app.add_subcommand(
      "ablate", "Run the full pipeline for one ablation row, generate, and evaluate");
  add_common(ablate);
  std::string ablate_split = "test";
  ablate->add_option("--split", ablate_split, "Evaluation split")
      ->check(CLI::IsMember({"train", "validation", "test"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed()) {
      SynthConfig sc{synth_tables, synth_distractors, synth_seed};
      const SynthData data = make_synthetic_domain(sc);
      fs::create_directories(synth_out);
      save_dataset(data.dataset, synth_out + "/dataset.tsv");
      save_corpus(data.corpus, synth_out + "/corpus.tsv");
      std::cout << "wrote " << data.dataset.size() << " tables to " << synth_out << '\n';
      return 0;
    }

    RunConfig cfg = config_path.empty() ? default_run_config() : load_run_config(config_path);
    apply_overrides(cfg, over);
    cfg.validate();

    if (prepare->parsed()) {
      const Workspace ws = prepare_workspace(cfg);
      std::cout << "prepared " << ws.train.size() << " train / " << ws.validation.size()
                << " validation / " << ws.test.size() << " test records, vocab "
                << ws.vocab->size() << ", " << ws.ka_pairs.size() << " augmentation pairs in "
                << cfg.out_dir << '\n';
      return 0;
    }

    if (pretrain_gen->parsed() || pretrain_ka->parsed() || finetune->parsed()) {
      const Workspace ws = load_workspace(cfg);
      std::optional<Stage> stop;
      if (pretrain_gen->parsed()) stop = Stage::GenLM;
      if (pretrain_ka->parsed()) stop = cfg.use_pa ? Stage::KA : Stage::GenLM;
      const auto result = run_stages(cfg, ws, stop, /*resume=*/true);
      print_checkpoint_summary(result);
      return 0;
    }

    if (generate->parsed() || ablate->parsed()) {
      const std::string split = generate->parsed() ? gen_split : ablate_split;
      const bool resume = generate->parsed();  // ablate always retrains its row
      const Workspace ws = load_workspace(cfg);
      const auto result = run_stages(cfg, ws, std::nullopt, resume);
      print_checkpoint_summary(result);
      const GeneratedFiles files = generate_split(cfg, ws, result, split);
      std::cout << "wrote " << files.hyp << '\n';
      if (ablate->parsed()) {
        json doc = evaluate_files(files.hyp, files.ref, files.tables, &cfg);
        doc["ablation"] = {{"use_pa", cfg.use_pa}, {"use_pt", cfg.use_pt}, {"split", split}};
        const std::string out = cfg.out_dir + "/report.json";
        write_report(doc, out);
        std::cout << "wrote " << out << " (bleu4 " << doc["metrics"]["bleu4"] << ")\n";
      }
      return 0;
    }

    if (evaluate->parsed()) {
      const RunConfig* echo = config_path.empty() ? nullptr : &cfg;
      write_report(evaluate_files(hyp_path, ref_path, tables_path, echo), report_path);
      std::cout << "wrote " << report_path << '\n';
      return 0;
    }

    std::cerr << app.help();
    return 2;
  } catch (const std::exception& e) {
    return classify_exit(e);
  }
}

}  // namespace adaptgen
