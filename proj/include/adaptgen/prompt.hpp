#pragma once

#include <string>
#include <vector>

#include "adaptgen/data.hpp"

namespace adaptgen {

// Token span [start, end) of a sentence matching one full attribute value.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string source_attribute;
  std::string matched_value;  // the sentence tokens in [start, end), space-joined

  bool operator==(const EntitySpan&) const = default;
};

// A corpus sentence with entity-value spans collapsed to <mask>, paired with
// the untouched sentence as the reconstruction target.
struct MaskedPrompt {
  std::vector<std::string> masked_tokens;
  std::vector<std::string> target_tokens;
  std::vector<std::string> span_texts;  // one per <mask>, in order
  std::string table_id;
};

// Maximal token subsequences of the sentence that exactly match a full
// attribute value, case-insensitive, resolved leftmost-longest, sorted by
// start.
std::vector<EntitySpan> detect_entities(const std::vector<std::string>& sentence_tokens,
                                        const Table& t);

// Replaces each span with exactly one <mask> token. Spans must be sorted and
// non-overlapping; at most max_masks spans are masked when max_masks >= 0.
// Throws if no span would be masked: such a sentence yields no pair.
MaskedPrompt mask_entities(const std::vector<std::string>& sentence_tokens,
                           const std::vector<EntitySpan>& spans, const std::string& table_id,
                           int max_masks = -1);

// Substitutes recorded span texts back for each <mask>; inverse of
// mask_entities for the spans it masked.
std::vector<std::string> unmask(const MaskedPrompt& prompt);

// One MaskedPrompt per corpus sentence with at least one detected span,
// ordered by table id then corpus index.
std::vector<MaskedPrompt> build_augmentation_pairs(const PrototypeCorpus& corpus,
                                                   const std::vector<Table>& tables,
                                                   int max_masks_per_sentence = -1);

void save_augmentation_pairs(const std::vector<MaskedPrompt>& pairs, const std::string& path);
std::vector<MaskedPrompt> load_augmentation_pairs(const std::string& path);

}  // namespace adaptgen
