#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace adaptgen {

// One cell of an infobox-style table.
struct AttributeValuePair {
  std::string attribute;  // must contain a non-whitespace character
  std::string value;
};

// Ordered attribute-value pairs with an identifier. Duplicate attributes are
// kept in source order.
struct Table {
  std::string id;
  std::vector<AttributeValuePair> pairs;
};

struct Reference {
  std::string table_id;
  std::string text;
};

struct DatasetRecord {
  Table table;
  Reference reference;
};

using Dataset = std::vector<DatasetRecord>;

// Unlabeled candidate sentences keyed by table id. Candidate order is file
// order and is used for deterministic tie-breaking downstream.
struct PrototypeCorpus {
  std::map<std::string, std::vector<std::string>> sentences;

  const std::vector<std::string>& candidates_for(const std::string& table_id) const;
};

struct FewShotSplit {
  std::vector<DatasetRecord> train;
  std::vector<DatasetRecord> validation;
  std::vector<DatasetRecord> test;
  int size_label = 0;
  std::uint64_t seed = 0;
};

// Parses one line of the dataset format:
//   id<TAB>attr=value<US>attr=value...<TAB>reference
// with <US> the unit-separator byte 0x1f. line_number is used in error
// messages only.
DatasetRecord parse_dataset_record(const std::string& line, std::size_t line_number);

Dataset load_dataset(const std::string& path);

// Corpus file: id<TAB>sentence, one per line. Sentences empty after trimming
// are rejected.
PrototypeCorpus load_corpus(const std::string& path);

// Renders a table as "Attr is value; Attr is value". The attribute surface
// form replaces underscores with spaces and uppercases the first character.
std::string linearize_table(const Table& t);

std::string attribute_surface_form(const std::string& attribute);

// Deterministic few-shot sampling. Train sets are nested: for a fixed seed the
// k-shot train set is a prefix of any larger train set. validation_size caps
// the validation split (default per the standard protocol).
FewShotSplit make_fewshot_split(const Dataset& dataset, int size_label,
                                std::uint64_t seed, std::size_t validation_size = 1000);

}  // namespace adaptgen
