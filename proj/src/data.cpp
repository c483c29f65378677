#include "adaptgen/data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include "adaptgen/rng.hpp"

namespace adaptgen {

namespace {

constexpr char kUnitSeparator = '\x1f';

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void parse_fail(std::size_t line_number, const std::string& what) {
  throw std::runtime_error("parse error at line " + std::to_string(line_number) + ": " + what);
}

}  // namespace

const std::vector<std::string>& PrototypeCorpus::candidates_for(const std::string& table_id) const {
  static const std::vector<std::string> empty;
  auto it = sentences.find(table_id);
  return it == sentences.end() ? empty : it->second;
}

DatasetRecord parse_dataset_record(const std::string& line, std::size_t line_number) {
  std::vector<std::string> fields = split_on(line, '\t');
  if (fields.size() != 3) {
    parse_fail(line_number, "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
  }
  const std::string id = trim(fields[0]);
  if (id.empty()) parse_fail(line_number, "empty table id");

  DatasetRecord rec;
  rec.table.id = id;
  for (const std::string& cell : split_on(fields[1], kUnitSeparator)) {
    std::size_t eq = cell.find('=');
    if (eq == std::string::npos) parse_fail(line_number, "pair without '=': \"" + cell + "\"");
    AttributeValuePair p{cell.substr(0, eq), cell.substr(eq + 1)};
    if (trim(p.attribute).empty()) parse_fail(line_number, "attribute is blank");
    rec.table.pairs.push_back(std::move(p));
  }
  if (rec.table.pairs.empty()) parse_fail(line_number, "table has no attribute-value pairs");

  rec.reference.table_id = id;
  rec.reference.text = fields[2];
  if (trim(rec.reference.text).empty()) parse_fail(line_number, "missing reference text");
  return rec;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  Dataset out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    out.push_back(parse_dataset_record(line, line_number));
  }
  return out;
}

PrototypeCorpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  PrototypeCorpus corpus;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) parse_fail(line_number, "corpus line without tab");
    std::string id = trim(line.substr(0, tab));
    std::string sentence = trim(line.substr(tab + 1));
    if (id.empty()) parse_fail(line_number, "empty table id in corpus");
    if (sentence.empty()) parse_fail(line_number, "empty corpus sentence");
    corpus.sentences[id].push_back(sentence);
  }
  return corpus;
}

std::string attribute_surface_form(const std::string& attribute) {
  std::string s = attribute;
  std::replace(s.begin(), s.end(), '_', ' ');
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string linearize_table(const Table& t) {
  if (t.pairs.empty()) throw std::runtime_error("cannot linearize empty table: " + t.id);
  std::string out;
  for (std::size_t i = 0; i < t.pairs.size(); ++i) {
    if (i > 0) out += "; ";
    out += attribute_surface_form(t.pairs[i].attribute);
    out += " is ";
    out += t.pairs[i].value;
  }
  return out;
}

FewShotSplit make_fewshot_split(const Dataset& dataset, int size_label,
                                std::uint64_t seed, std::size_t validation_size) {
  static const int allowed[] = {50, 100, 200, 500};
  if (std::find(std::begin(allowed), std::end(allowed), size_label) == std::end(allowed)) {
    throw std::runtime_error("size_label must be one of 50/100/200/500, got " +
                             std::to_string(size_label));
  }
  const std::size_t need = static_cast<std::size_t>(size_label) + validation_size;
  if (dataset.size() < need) {
    throw std::runtime_error("insufficient records for split: required " + std::to_string(need) +
                             ", available " + std::to_string(dataset.size()));
  }

  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  DeterministicRng rng(seed);
  rng.shuffle(order);

  FewShotSplit split;
  split.size_label = size_label;
  split.seed = seed;
  std::size_t pos = 0;
  for (; pos < static_cast<std::size_t>(size_label); ++pos) split.train.push_back(dataset[order[pos]]);
  for (std::size_t v = 0; v < validation_size && pos < order.size(); ++v, ++pos) {
    split.validation.push_back(dataset[order[pos]]);
  }
  for (; pos < order.size(); ++pos) split.test.push_back(dataset[order[pos]]);
  return split;
}

}  // namespace adaptgen
