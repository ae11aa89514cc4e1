#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace xmcaug {

using LabelIndex = std::uint32_t;

// One sparse row of (label, weight) entries, indices strictly ascending.
using SparseRow = std::vector<std::pair<LabelIndex, double>>;

// Row-major sparse N x L matrix of label weights in (0, 1].
// Hard ground-truth matrices carry weight exactly 1 on every entry;
// augmented matrices carry fractional soft targets.
struct SparseLabelMatrix {
  std::size_t n_labels = 0;
  std::vector<SparseRow> rows;

  std::size_t n_rows() const { return rows.size(); }

  std::size_t nnz() const {
    std::size_t total = 0;
    for (const auto& r : rows) total += r.size();
    return total;
  }

  bool is_hard() const {
    for (const auto& r : rows)
      for (const auto& [idx, w] : r)
        if (w != 1.0) return false;
    return true;
  }

  // Per-label count of rows containing the label.
  std::vector<std::uint64_t> label_frequencies() const {
    std::vector<std::uint64_t> freq(n_labels, 0);
    for (const auto& r : rows)
      for (const auto& [idx, w] : r) ++freq[idx];
    return freq;
  }

  // Throws on any invariant violation (index range, ordering, weight range).
  void validate() const;
};

// Ordered list of UTF-8 short texts, one per instance or per label.
struct TextCorpus {
  std::vector<std::string> texts;

  std::size_t size() const { return texts.size(); }
};

struct Dataset {
  TextCorpus instances;
  TextCorpus label_features;
  SparseLabelMatrix y;
  std::string name;

  std::size_t n_rows() const { return y.n_rows(); }
  std::size_t n_labels() const { return y.n_labels; }

  // Checks row/label counts against the paired corpora.
  void validate() const;
};

}  // namespace xmcaug
