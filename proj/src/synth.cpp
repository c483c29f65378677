#include "adaptgen/synth.hpp"

#include <fstream>
#include <stdexcept>

#include "adaptgen/rng.hpp"

namespace adaptgen {

namespace {

const std::vector<std::string> kFirstNames = {
    "alba", "boris", "carla", "dmitri", "elena", "farid", "gia",  "hugo",
    "iris", "jonas", "kira",  "liam",   "mona",  "nils",  "oda",  "pavel"};
const std::vector<std::string> kLastNames = {
    "arden", "bloom", "cole", "dray", "ekman", "faro", "gould", "hale",
    "ibsen", "jarvi", "kern", "lund", "marsh", "noll", "orrin", "pike"};
const std::vector<std::string> kOccupations = {"painter", "engineer", "botanist", "pilot",
                                               "chemist", "violinist", "mason",   "archer"};
const std::vector<std::string> kPlaces = {"lisbon", "tartu", "quito", "oslo",
                                          "perth",  "bergen", "kyoto", "leeds"};

template <class T>
const T& pick(DeterministicRng& rng, const std::vector<T>& pool) {
  return pool[rng.below(pool.size())];
}

}  // namespace

SynthData make_synthetic_domain(const SynthConfig& cfg) {
  if (cfg.n_tables < 1) throw std::runtime_error("n_tables must be >= 1");
  if (cfg.distractors_per_table < 0) throw std::runtime_error("distractors must be >= 0");
  DeterministicRng rng(cfg.seed);
  SynthData out;

  struct Person {
    std::string name, occupation, place;
  };
  std::vector<Person> people;
  people.reserve(static_cast<std::size_t>(cfg.n_tables));
  for (int i = 0; i < cfg.n_tables; ++i) {
    people.push_back({pick(rng, kFirstNames) + " " + pick(rng, kLastNames),
                      pick(rng, kOccupations), pick(rng, kPlaces)});
  }

  for (int i = 0; i < cfg.n_tables; ++i) {
    const Person& p = people[static_cast<std::size_t>(i)];
    DatasetRecord rec;
    rec.table.id = "t" + std::to_string(i);
    rec.table.pairs = {{"name", p.name}, {"occupation", p.occupation}, {"birthplace", p.place}};
    rec.reference.table_id = rec.table.id;
    rec.reference.text = p.name + " is a " + p.occupation + " from " + p.place + " .";
    out.dataset.push_back(rec);

    auto& sentences = out.corpus.sentences[rec.table.id];
    sentences.push_back(p.name + " works as a " + p.occupation + " .");
    sentences.push_back(p.name + " was born in " + p.place + " .");
    sentences.push_back("the " + p.occupation + " " + p.name + " lives in " + p.place + " .");
    for (int d = 0; d < cfg.distractors_per_table; ++d) {
      const Person& q = people[rng.below(people.size())];
      sentences.push_back(q.name + " is a " + q.occupation + " from " + q.place + " .");
    }
  }
  return out;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write dataset file: " + path);
  for (const auto& rec : dataset) {
    f << rec.table.id << '\t';
    for (std::size_t i = 0; i < rec.table.pairs.size(); ++i) {
      if (i > 0) f << '\x1f';
      f << rec.table.pairs[i].attribute << '=' << rec.table.pairs[i].value;
    }
    f << '\t' << rec.reference.text << '\n';
  }
}

void save_corpus(const PrototypeCorpus& corpus, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write corpus file: " + path);
  for (const auto& [id, sentences] : corpus.sentences) {
    for (const auto& s : sentences) f << id << '\t' << s << '\n';
  }
}

}  // namespace adaptgen
