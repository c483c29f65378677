#pragma once

#include <optional>
#include <string>

#include "adaptgen/trainer.hpp"

namespace adaptgen {

// Fully resolved run configuration. Defaults are the struct initializers;
// a config file overrides defaults; CLI flags override the file.
struct RunConfig {
  // data
  std::string dataset_path;
  std::string corpus_path;
  int fewshot_size = 50;
  std::uint64_t split_seed = 1;
  int validation_size = 1000;
  int vocab_min_count = 1;

  PipelineConfig pipeline;
  bool use_pa = true;
  bool use_pt = true;
  std::string out_dir = "out";
  int max_decode_len = 32;

  void validate() const;
};

// CLI-provided overrides; only set fields take effect.
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<bool> no_pa;
  std::optional<bool> no_pt;
  std::optional<std::string> out_dir;
  std::optional<int> prototypes_n;
  std::optional<int> negatives_k;
};

RunConfig default_run_config();

// Parses the documented JSON schema; unknown keys are an error so typos fail
// loudly.
RunConfig load_run_config(const std::string& path);

void apply_overrides(RunConfig& cfg, const CliOverrides& o);

// Deterministic (key-ordered) JSON echo of a resolved config.
std::string run_config_json(const RunConfig& cfg);

}  // namespace adaptgen
