#include "adaptgen/trainer.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace adaptgen {

void StageConfig::validate() const {
  if (learning_rate <= 0.0) throw std::runtime_error("learning_rate must be > 0");
  if (batch_size < 1) throw std::runtime_error("batch_size must be >= 1");
  if (max_steps < 1) throw std::runtime_error("max_steps must be >= 1");
  switch (stage) {
    case Stage::KA:
      if (freeze_policy != FreezePolicy::AdapterOnly) {
        throw std::runtime_error("KA stage requires the ADAPTER_ONLY freeze policy");
      }
      break;
    case Stage::Finetune:
      if (freeze_policy != FreezePolicy::AdapterFrozen) {
        throw std::runtime_error("FINETUNE stage requires the ADAPTER_FROZEN freeze policy");
      }
      break;
    case Stage::GenLM:
      if (freeze_policy != FreezePolicy::AllTrainable) {
        throw std::runtime_error("GEN_LM stage requires the ALL_TRAINABLE freeze policy");
      }
      break;
    case Stage::GenPS:
      break;
  }
}

std::vector<Stage> RunManifest::stage_order() const {
  std::vector<Stage> order;
  if (use_pt) order.push_back(Stage::GenPS);
  order.push_back(Stage::GenLM);
  if (use_pa) order.push_back(Stage::KA);
  order.push_back(Stage::Finetune);
  return order;
}

std::string RunManifest::checkpoint_path(Stage s) const {
  return out_dir + "/stage_" + lowercase(to_string(s)) + ".ckpt";
}

std::vector<int> build_lm_input(const PrototypeSet& prototypes, const Table& t, const Vocab& v,
                                int max_positions) {
  if (t.pairs.empty()) throw std::runtime_error("build_lm_input: table " + t.id + " is empty");
  if (max_positions < 1) throw std::runtime_error("build_lm_input: max_positions must be >= 1");

  std::vector<int> table_ids = v.encode(lowercase(linearize_table(t)));
  // <context_start> prefix plus trailing <eos>.
  const int table_cost = static_cast<int>(table_ids.size()) + 2;
  if (table_cost > max_positions) {
    throw std::runtime_error("build_lm_input: table " + t.id + " alone needs " +
                             std::to_string(table_cost) + " positions, budget is " +
                             std::to_string(max_positions));
  }

  std::vector<std::vector<int>> proto_ids;
  proto_ids.reserve(prototypes.members.size());
  for (const auto& m : prototypes.members) proto_ids.push_back(v.encode(m.sentence));

  // Members are ordered by score descending, so dropping from the back drops
  // the lowest-scored prototype first.
  auto total = [&] {
    int n = table_cost;
    for (std::size_t i = 0; i < proto_ids.size(); ++i) {
      n += static_cast<int>(proto_ids[i].size());
      if (i + 1 < proto_ids.size()) n += 1;  // <sep>
    }
    return n;
  };
  while (!proto_ids.empty() && total() > max_positions) proto_ids.pop_back();

  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(total()));
  for (std::size_t i = 0; i < proto_ids.size(); ++i) {
    if (i > 0) out.push_back(Vocab::kSep);
    out.insert(out.end(), proto_ids[i].begin(), proto_ids[i].end());
  }
  out.push_back(Vocab::kContextStart);
  out.insert(out.end(), table_ids.begin(), table_ids.end());
  out.push_back(Vocab::kEos);
  return out;
}

void save_prototype_cache(const std::map<std::string, PrototypeSet>& cache,
                          const std::string& path) {
  std::ostringstream out;
  for (const auto& [table_id, set] : cache) {
    if (table_id.find('\t') != std::string::npos || table_id.find('\n') != std::string::npos) {
      throw std::runtime_error("table id contains tab or newline: " + table_id);
    }
    out << table_id << '\t' << set.n << '\n';
    for (const auto& m : set.members) {
      out << '\t' << m.corpus_index << '\t' << std::hexfloat << m.score << std::defaultfloat
          << '\t' << m.sentence << '\n';
    }
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write prototype cache: " + path);
  f << out.str();
}

std::map<std::string, PrototypeSet> load_prototype_cache(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open prototype cache: " + path);
  std::map<std::string, PrototypeSet> cache;
  PrototypeSet* current = nullptr;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] != '\t') {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw std::runtime_error("prototype cache line " + std::to_string(line_no) +
                                 ": missing tab");
      }
      PrototypeSet set;
      set.table_id = line.substr(0, tab);
      set.n = std::stoi(line.substr(tab + 1));
      current = &cache.emplace(set.table_id, std::move(set)).first->second;
    } else {
      if (!current) {
        throw std::runtime_error("prototype cache line " + std::to_string(line_no) +
                                 ": member before any table header");
      }
      const auto t1 = line.find('\t', 1);
      const auto t2 = line.find('\t', t1 + 1);
      if (t1 == std::string::npos || t2 == std::string::npos) {
        throw std::runtime_error("prototype cache line " + std::to_string(line_no) +
                                 ": expected index, score, sentence");
      }
      PrototypeSet::Member m;
      m.corpus_index = static_cast<std::size_t>(std::stoull(line.substr(1, t1 - 1)));
      m.score = std::strtod(line.substr(t1 + 1, t2 - t1 - 1).c_str(), nullptr);
      m.sentence = line.substr(t2 + 1);
      current->members.push_back(std::move(m));
    }
  }
  return cache;
}

}  // namespace adaptgen
