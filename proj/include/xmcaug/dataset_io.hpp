#pragma once

#include <filesystem>
#include <string>

#include "xmcaug/types.hpp"

namespace xmcaug::io {

// Sparse label matrix file format (Extreme Classification Repository
// convention): first line "<n_rows> <n_labels>", then one line per row of
// space-separated "index:weight" entries. Empty lines are empty rows.
SparseLabelMatrix read_label_matrix(const std::filesystem::path& path);

// Writes the exact format read_label_matrix accepts. Weights are serialized
// with 6 decimal digits, except weight 1 which is written as "1";
// read(write(m)) equals m up to 1e-6 weight quantization and a second
// write is byte-identical to the first.
void write_label_matrix(const SparseLabelMatrix& m,
                        const std::filesystem::path& path);

// Canonical serialization of one weight ("1" or e.g. "0.333333").
std::string format_weight(double w);

// One UTF-8 text per line; only the trailing newline is stripped,
// interior whitespace is preserved verbatim.
TextCorpus read_text_corpus(const std::filesystem::path& path);

void write_text_corpus(const TextCorpus& corpus,
                       const std::filesystem::path& path);

// Appends b's instances and label rows after a's. Both datasets must share
// the label space (same label count and identical label-feature texts).
Dataset concat_datasets(const Dataset& a, const Dataset& b);

}  // namespace xmcaug::io
