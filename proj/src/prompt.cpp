#include "adaptgen/prompt.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include "adaptgen/tokenizer.hpp"

namespace adaptgen {

namespace {

std::string join(const std::vector<std::string>& toks, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += ' ';
    out += toks[i];
  }
  return out;
}

std::vector<std::string> lowered(const std::vector<std::string>& toks) {
  std::vector<std::string> out;
  out.reserve(toks.size());
  for (const auto& t : toks) out.push_back(lowercase(t));
  return out;
}

}  // namespace

std::vector<EntitySpan> detect_entities(const std::vector<std::string>& sentence_tokens,
                                        const Table& t) {
  const std::vector<std::string> sent = lowered(sentence_tokens);

  struct ValueTokens {
    std::vector<std::string> tokens;
    const AttributeValuePair* pair;
  };
  std::vector<ValueTokens> values;
  for (const auto& p : t.pairs) {
    std::vector<std::string> vt = lowered(tokenize(p.value));
    if (!vt.empty()) values.push_back({std::move(vt), &p});
  }

  std::vector<EntitySpan> spans;
  std::size_t pos = 0;
  while (pos < sent.size()) {
    std::size_t best_len = 0;
    const AttributeValuePair* best_pair = nullptr;
    for (const auto& v : values) {
      const std::size_t len = v.tokens.size();
      if (len <= best_len || pos + len > sent.size()) continue;
      if (std::equal(v.tokens.begin(), v.tokens.end(), sent.begin() + static_cast<long>(pos))) {
        best_len = len;
        best_pair = v.pair;
      }
    }
    if (best_len > 0) {
      spans.push_back(EntitySpan{pos, pos + best_len, best_pair->attribute,
                                 join(sentence_tokens, pos, pos + best_len)});
      pos += best_len;
    } else {
      ++pos;
    }
  }
  return spans;
}

MaskedPrompt mask_entities(const std::vector<std::string>& sentence_tokens,
                           const std::vector<EntitySpan>& spans, const std::string& table_id,
                           int max_masks) {
  std::size_t n_mask = spans.size();
  if (max_masks >= 0) n_mask = std::min<std::size_t>(n_mask, static_cast<std::size_t>(max_masks));
  if (n_mask == 0) throw std::runtime_error("no entity span to mask; sentence yields no pair");

  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (spans[i].start >= spans[i].end || spans[i].end > sentence_tokens.size()) {
      throw std::runtime_error("entity span out of range");
    }
    if (i > 0 && spans[i].start < spans[i - 1].end) {
      throw std::runtime_error("entity spans overlap or are unsorted");
    }
  }

  MaskedPrompt prompt;
  prompt.table_id = table_id;
  prompt.target_tokens = sentence_tokens;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n_mask; ++i) {
    const EntitySpan& s = spans[i];
    for (; pos < s.start; ++pos) prompt.masked_tokens.push_back(sentence_tokens[pos]);
    prompt.masked_tokens.push_back("<mask>");
    prompt.span_texts.push_back(join(sentence_tokens, s.start, s.end));
    pos = s.end;
  }
  for (; pos < sentence_tokens.size(); ++pos) prompt.masked_tokens.push_back(sentence_tokens[pos]);
  return prompt;
}

std::vector<std::string> unmask(const MaskedPrompt& prompt) {
  std::vector<std::string> out;
  std::size_t next_span = 0;
  for (const std::string& tok : prompt.masked_tokens) {
    if (tok == "<mask>") {
      if (next_span >= prompt.span_texts.size()) {
        throw std::runtime_error("masked prompt has more <mask> tokens than recorded spans");
      }
      for (const std::string& t : tokenize(prompt.span_texts[next_span])) out.push_back(t);
      ++next_span;
    } else {
      out.push_back(tok);
    }
  }
  return out;
}

std::vector<MaskedPrompt> build_augmentation_pairs(const PrototypeCorpus& corpus,
                                                   const std::vector<Table>& tables,
                                                   int max_masks_per_sentence) {
  std::map<std::string, const Table*> by_id;
  for (const Table& t : tables) by_id[t.id] = &t;

  std::vector<MaskedPrompt> pairs;
  for (const auto& [table_id, sentences] : corpus.sentences) {
    auto it = by_id.find(table_id);
    if (it == by_id.end()) continue;
    for (const std::string& sentence : sentences) {
      const std::vector<std::string> toks = tokenize(sentence);
      const std::vector<EntitySpan> spans = detect_entities(toks, *it->second);
      if (spans.empty()) continue;
      pairs.push_back(mask_entities(toks, spans, table_id, max_masks_per_sentence));
    }
  }
  return pairs;
}

void save_augmentation_pairs(const std::vector<MaskedPrompt>& pairs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write augmentation pairs: " + path);
  for (const auto& p : pairs) {
    out << p.table_id << '\t' << join(p.masked_tokens, 0, p.masked_tokens.size()) << '\t'
        << join(p.target_tokens, 0, p.target_tokens.size()) << '\n';
  }
}

std::vector<MaskedPrompt> load_augmentation_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open augmentation pairs: " + path);
  std::vector<MaskedPrompt> pairs;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw std::runtime_error("bad augmentation pair at line " + std::to_string(line_number));
    }
    MaskedPrompt p;
    p.table_id = line.substr(0, t1);
    p.masked_tokens = tokenize(line.substr(t1 + 1, t2 - t1 - 1));
    p.target_tokens = tokenize(line.substr(t2 + 1));
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace adaptgen
