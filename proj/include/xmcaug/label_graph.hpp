#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "xmcaug/types.hpp"

namespace xmcaug::graph {

// Sparse symmetric L x L co-occurrence count matrix. The diagonal holds
// label frequencies; off-diagonal entries count instances containing both
// labels. Off-diagonal adjacency is stored sorted by neighbor index,
// once per direction.
class CooccurrenceGraph {
public:
  using Neighbor = std::pair<LabelIndex, std::uint64_t>;

  // Counts exact co-occurrences over a hard (all-weights-1) label matrix.
  // Refuses soft matrices.
  static CooccurrenceGraph build(const SparseLabelMatrix& y);

  std::size_t n_labels() const { return freq_.size(); }

  // G_ll, the number of training instances containing label l.
  std::uint64_t frequency(LabelIndex l) const { return freq_[l]; }

  const std::vector<std::uint64_t>& frequencies() const { return freq_; }

  // G_ij for i != j (0 when the pair never co-occurs).
  std::uint64_t count(LabelIndex i, LabelIndex j) const;

  // Off-diagonal neighbors of l, ascending by index.
  const std::vector<Neighbor>& neighbors(LabelIndex l) const {
    return adj_[l];
  }

  // P[Y_i = 1 | Y_j = 1] = G_ij / G_jj. conditional(j, j) == 1.
  double conditional(LabelIndex i, LabelIndex j) const;

  // S_ij = (G_ij/G_jj + G_ij/G_ii) / 2; symmetric, S_ii == 1.
  double symmetrized_similarity(LabelIndex i, LabelIndex j) const;

  // Up to k entries (label, conditional given j), the label itself first
  // with conditional 1, then descending conditional, ties by ascending index.
  std::vector<std::pair<LabelIndex, double>> top_neighbors(LabelIndex j,
                                                           std::size_t k) const;

  std::size_t nnz_offdiag() const;

  // Debug dump: lines "i j count" sorted by (i, j), including the diagonal.
  void dump(const std::filesystem::path& path) const;

private:
  std::vector<std::uint64_t> freq_;
  std::vector<std::vector<Neighbor>> adj_;
};

struct WalkParams {
  double restart_prob = 0.8;
  std::uint32_t walk_length = 3;
  std::size_t top_k_per_node = 100;
};

// Restart-walk smoothing of the co-occurrence graph: per source label j,
// the walk distribution after walk_length steps of
//   v <- restart_prob * e_j + (1 - restart_prob) * v P
// over the row-normalized off-diagonal transition matrix P, truncated to the
// top_k highest-scoring labels and scaled so the row maximum is 1.
class WalkGraph {
public:
  static WalkGraph build(const CooccurrenceGraph& g, const WalkParams& params);

  std::size_t n_labels() const { return rows_.size(); }
  const WalkParams& params() const { return params_; }

  // (label, score) entries sorted ascending by label; empty for
  // zero-frequency sources. The row maximum is scaled to 1.
  const std::vector<std::pair<LabelIndex, double>>& row(LabelIndex j) const {
    return rows_[j];
  }

private:
  WalkParams params_;
  std::vector<std::vector<std::pair<LabelIndex, double>>> rows_;
};

}  // namespace xmcaug::graph
