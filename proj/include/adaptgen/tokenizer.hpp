#pragma once

#include <array>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace adaptgen {

// Splits on whitespace, emits punctuation as single-character tokens, and
// keeps the reserved "<...>" tokens atomic. No case folding.
std::vector<std::string> tokenize(const std::string& text);

std::string lowercase(const std::string& s);

// Closed word-level vocabulary. Reserved ids occupy 0..6 in this order:
// <pad> <bos> <eos> <unk> <sep> <context_start> <mask>.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kSep = 4;
  static constexpr int kContextStart = 5;
  static constexpr int kMask = 6;
  static constexpr int kNumReserved = 7;

  static const std::array<std::string, kNumReserved>& reserved_tokens();

  // Tokens with frequency >= min_count enter the vocabulary, ordered by
  // frequency descending then lexicographic.
  static Vocab build(const std::vector<std::string>& corpus_texts, int min_count);

  static Vocab load(const std::string& path);
  void save(const std::string& path) const;

  int id(const std::string& token) const;  // unknown -> kUnk
  const std::string& token(int id) const;  // out of range -> throws
  std::size_t size() const { return id_to_token_.size(); }

  std::vector<int> encode(const std::string& text) const;

  // Joins with single spaces, drops <pad>, stops at the first <eos>.
  std::string decode(std::span<const int> ids) const;

 private:
  Vocab();
  void add_token(const std::string& tok);

  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

}  // namespace adaptgen
