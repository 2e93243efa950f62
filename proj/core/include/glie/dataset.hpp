#pragma once

#include <string>
#include <vector>

#include "glie/types.hpp"

namespace glie {

// On-disk dataset format: one example per line, each line a JSON record
//   {"ner": [[start, end, "label"], ...], "tokenized_text": ["w0", ...]}
// Indexes are 0-based and inclusive. serialize_record emits the canonical
// form (sorted keys, no whitespace), so serialize(deserialize(x)) is
// byte-identical for canonical files.

std::string serialize_record(const AnnotatedExample& ex);
AnnotatedExample deserialize_record(const std::string& line);

std::vector<AnnotatedExample> load_dataset(const std::string& path);
void save_dataset(const std::string& path, const std::vector<AnnotatedExample>& examples);

// Sorted union of normalized span labels across the dataset.
std::vector<std::string> dataset_label_union(const std::vector<AnnotatedExample>& examples);

// Replace every example's label_set (validates that span labels are covered).
void apply_label_set(std::vector<AnnotatedExample>& examples,
                     const std::vector<std::string>& labels);

} // namespace glie
