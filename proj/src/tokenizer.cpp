#include "adaptgen/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <stdexcept>

namespace adaptgen {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

// Returns the length of a reserved token starting at position i, or 0.
std::size_t match_reserved(const std::string& text, std::size_t i) {
  for (const std::string& tok : Vocab::reserved_tokens()) {
    if (text.compare(i, tok.size(), tok) == 0) return tok.size();
  }
  return 0;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      out.push_back(word);
      word.clear();
    }
  };
  for (std::size_t i = 0; i < text.size();) {
    const char c = text[i];
    if (is_space(c)) {
      flush();
      ++i;
      continue;
    }
    if (c == '<') {
      if (std::size_t len = match_reserved(text, i); len > 0) {
        flush();
        out.push_back(text.substr(i, len));
        i += len;
        continue;
      }
    }
    if (is_punct(c)) {
      flush();
      out.push_back(std::string(1, c));
      ++i;
      continue;
    }
    word.push_back(c);
    ++i;
  }
  flush();
  return out;
}

std::string lowercase(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

const std::array<std::string, Vocab::kNumReserved>& Vocab::reserved_tokens() {
  static const std::array<std::string, kNumReserved> toks = {
      "<pad>", "<bos>", "<eos>", "<unk>", "<sep>", "<context_start>", "<mask>"};
  return toks;
}

Vocab::Vocab() {
  for (const std::string& tok : reserved_tokens()) add_token(tok);
}

void Vocab::add_token(const std::string& tok) {
  token_to_id_.emplace(tok, static_cast<int>(id_to_token_.size()));
  id_to_token_.push_back(tok);
}

Vocab Vocab::build(const std::vector<std::string>& corpus_texts, int min_count) {
  if (corpus_texts.empty()) throw std::runtime_error("cannot build vocab from empty corpus");
  if (min_count < 1) throw std::runtime_error("min_count must be >= 1");

  std::map<std::string, std::size_t> counts;
  const auto& reserved = reserved_tokens();
  for (const std::string& text : corpus_texts) {
    for (const std::string& tok : tokenize(text)) {
      if (std::find(reserved.begin(), reserved.end(), tok) != reserved.end()) continue;
      ++counts[tok];
    }
  }

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [tok, n] : counts) {
    if (n >= static_cast<std::size_t>(min_count)) kept.emplace_back(tok, n);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocab v;
  for (const auto& [tok, n] : kept) v.add_token(tok);
  if (v.size() < 8) {
    throw std::runtime_error("vocabulary too small: no corpus token meets min_count " +
                             std::to_string(min_count));
  }
  return v;
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocab file: " + path);
  Vocab v;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line_number <= kNumReserved) {
      if (line != reserved_tokens()[line_number - 1]) {
        throw std::runtime_error("vocab file line " + std::to_string(line_number) +
                                 " is not the expected reserved token");
      }
      continue;
    }
    if (line.empty()) throw std::runtime_error("empty vocab entry at line " + std::to_string(line_number));
    v.add_token(line);
  }
  if (line_number < kNumReserved) throw std::runtime_error("vocab file truncated: " + path);
  return v;
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocab file: " + path);
  for (const std::string& tok : id_to_token_) out << tok << '\n';
}

int Vocab::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw std::runtime_error("token id out of range: " + std::to_string(id));
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocab::encode(const std::string& text) const {
  std::vector<int> ids;
  for (const std::string& tok : tokenize(text)) ids.push_back(id(tok));
  return ids;
}

std::string Vocab::decode(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (id == kEos) break;
    if (id == kPad) continue;
    const std::string& tok = token(id);
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

}  // namespace adaptgen
