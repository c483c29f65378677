#include "adaptgen/config.hpp"

#include <fstream>
#include <functional>

#include "json.hpp"

namespace adaptgen {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void config_fail(const std::string& what) {
  throw std::runtime_error("config error: " + what);
}

// Applies every key of `obj` through `field`, which maps a known key to a
// setter; unknown keys fail.
void for_known_keys(const json& obj, const std::string& scope,
                    const std::function<bool(const std::string&, const json&)>& field) {
  if (!obj.is_object()) config_fail(scope + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!field(key, value)) config_fail("unknown key \"" + scope + "." + key + "\"");
  }
}

void read_stage(const json& obj, const std::string& scope, StageConfig& s) {
  for_known_keys(obj, scope, [&](const std::string& k, const json& v) {
    if (k == "learning_rate") s.learning_rate = v.get<double>();
    else if (k == "batch_size") s.batch_size = v.get<int>();
    else if (k == "max_steps") s.max_steps = v.get<int>();
    else return false;
    return true;
  });
}

AdapterPlacement placement_from(const std::string& s) {
  if (s == "every_layer") return AdapterPlacement::EveryLayer;
  if (s == "final_layer_only") return AdapterPlacement::FinalLayerOnly;
  if (s == "none") return AdapterPlacement::None;
  config_fail("adapter_placement must be \"every_layer\", \"final_layer_only\", or \"none\", got \"" +
              s + "\"");
}

json stage_json(const StageConfig& s) {
  return json{{"learning_rate", s.learning_rate},
              {"batch_size", s.batch_size},
              {"max_steps", s.max_steps}};
}

}  // namespace

void RunConfig::validate() const {
  if (fewshot_size < 1) config_fail("fewshot_size must be >= 1");
  if (validation_size < 0) config_fail("validation_size must be >= 0");
  if (vocab_min_count < 1) config_fail("vocab_min_count must be >= 1");
  if (pipeline.prototypes_n < 1) config_fail("prototypes_n must be >= 1");
  if (pipeline.negatives_k < 1) config_fail("negatives_k must be >= 1");
  if (max_decode_len < 1) config_fail("max_decode_len must be >= 1");
  pipeline.gen_ps.validate();
  pipeline.gen_lm.validate();
  pipeline.ka.validate();
  pipeline.finetune.validate();
}

RunConfig default_run_config() { return RunConfig{}; }

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    config_fail(std::string("invalid JSON in ") + path + ": " + e.what());
  }

  RunConfig cfg = default_run_config();
  for_known_keys(doc, "$", [&](const std::string& k, const json& v) {
    if (k == "data") {
      for_known_keys(v, "data", [&](const std::string& dk, const json& dv) {
        if (dk == "dataset") cfg.dataset_path = dv.get<std::string>();
        else if (dk == "corpus") cfg.corpus_path = dv.get<std::string>();
        else if (dk == "fewshot_size") cfg.fewshot_size = dv.get<int>();
        else if (dk == "split_seed") cfg.split_seed = dv.get<std::uint64_t>();
        else if (dk == "validation_size") cfg.validation_size = dv.get<int>();
        else if (dk == "vocab_min_count") cfg.vocab_min_count = dv.get<int>();
        else return false;
        return true;
      });
    } else if (k == "model") {
      for_known_keys(v, "model", [&](const std::string& mk, const json& mv) {
        auto& m = cfg.pipeline.model;
        if (mk == "d_model") m.d_model = mv.get<int>();
        else if (mk == "n_heads") m.n_heads = mv.get<int>();
        else if (mk == "n_encoder_layers") m.n_encoder_layers = mv.get<int>();
        else if (mk == "n_decoder_layers") m.n_decoder_layers = mv.get<int>();
        else if (mk == "d_ffn") m.d_ffn = mv.get<int>();
        else if (mk == "d_bottleneck") m.d_bottleneck = mv.get<int>();
        else if (mk == "max_positions") m.max_positions = mv.get<int>();
        else if (mk == "adapter_placement") m.adapter_placement = placement_from(mv.get<std::string>());
        else if (mk == "adapter_activation") m.adapter_activation = mv.get<bool>();
        else return false;
        return true;
      });
    } else if (k == "selector") {
      for_known_keys(v, "selector", [&](const std::string& sk, const json& sv) {
        auto& s = cfg.pipeline.selector;
        if (sk == "d_model") s.d_model = sv.get<int>();
        else if (sk == "n_heads") s.n_heads = sv.get<int>();
        else if (sk == "n_layers") s.n_layers = sv.get<int>();
        else if (sk == "d_ffn") s.d_ffn = sv.get<int>();
        else if (sk == "max_positions") s.max_positions = sv.get<int>();
        else return false;
        return true;
      });
    } else if (k == "stages") {
      for_known_keys(v, "stages", [&](const std::string& sk, const json& sv) {
        if (sk == "gen_ps") read_stage(sv, "stages.gen_ps", cfg.pipeline.gen_ps);
        else if (sk == "gen_lm") read_stage(sv, "stages.gen_lm", cfg.pipeline.gen_lm);
        else if (sk == "ka") read_stage(sv, "stages.ka", cfg.pipeline.ka);
        else if (sk == "finetune") read_stage(sv, "stages.finetune", cfg.pipeline.finetune);
        else return false;
        return true;
      });
    } else if (k == "prototypes_n") cfg.pipeline.prototypes_n = v.get<int>();
    else if (k == "negatives_k") cfg.pipeline.negatives_k = v.get<int>();
    else if (k == "max_target_len") cfg.pipeline.max_target_len = v.get<int>();
    else if (k == "max_decode_len") cfg.max_decode_len = v.get<int>();
    else if (k == "seed") cfg.pipeline.seed = v.get<std::uint64_t>();
    else if (k == "use_pa") cfg.use_pa = v.get<bool>();
    else if (k == "use_pt") cfg.use_pt = v.get<bool>();
    else if (k == "out_dir") cfg.out_dir = v.get<std::string>();
    else return false;
    return true;
  });
  return cfg;
}

void apply_overrides(RunConfig& cfg, const CliOverrides& o) {
  if (o.seed) {
    cfg.pipeline.seed = *o.seed;
    cfg.pipeline.gen_ps.seed = *o.seed;
    cfg.pipeline.gen_lm.seed = *o.seed;
    cfg.pipeline.ka.seed = *o.seed;
    cfg.pipeline.finetune.seed = *o.seed;
  }
  if (o.no_pa) cfg.use_pa = !*o.no_pa;
  if (o.no_pt) cfg.use_pt = !*o.no_pt;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.prototypes_n) cfg.pipeline.prototypes_n = *o.prototypes_n;
  if (o.negatives_k) cfg.pipeline.negatives_k = *o.negatives_k;
}

std::string run_config_json(const RunConfig& cfg) {
  json doc;
  doc["data"] = {{"dataset", cfg.dataset_path},
                 {"corpus", cfg.corpus_path},
                 {"fewshot_size", cfg.fewshot_size},
                 {"split_seed", cfg.split_seed},
                 {"validation_size", cfg.validation_size},
                 {"vocab_min_count", cfg.vocab_min_count}};
  const auto& m = cfg.pipeline.model;
  doc["model"] = {{"d_model", m.d_model},
                  {"n_heads", m.n_heads},
                  {"n_encoder_layers", m.n_encoder_layers},
                  {"n_decoder_layers", m.n_decoder_layers},
                  {"d_ffn", m.d_ffn},
                  {"d_bottleneck", m.d_bottleneck},
                  {"max_positions", m.max_positions},
                  {"adapter_placement", to_string(m.adapter_placement)},
                  {"adapter_activation", m.adapter_activation}};
  const auto& s = cfg.pipeline.selector;
  doc["selector"] = {{"d_model", s.d_model},
                     {"n_heads", s.n_heads},
                     {"n_layers", s.n_layers},
                     {"d_ffn", s.d_ffn},
                     {"max_positions", s.max_positions}};
  doc["stages"] = {{"gen_ps", stage_json(cfg.pipeline.gen_ps)},
                   {"gen_lm", stage_json(cfg.pipeline.gen_lm)},
                   {"ka", stage_json(cfg.pipeline.ka)},
                   {"finetune", stage_json(cfg.pipeline.finetune)}};
  doc["prototypes_n"] = cfg.pipeline.prototypes_n;
  doc["negatives_k"] = cfg.pipeline.negatives_k;
  doc["max_target_len"] = cfg.pipeline.max_target_len;
  doc["max_decode_len"] = cfg.max_decode_len;
  doc["seed"] = cfg.pipeline.seed;
  doc["use_pa"] = cfg.use_pa;
  doc["use_pt"] = cfg.use_pt;
  doc["out_dir"] = cfg.out_dir;
  return doc.dump(2);
}

}  // namespace adaptgen
