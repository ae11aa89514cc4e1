#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xmcaug/label_graph.hpp"
#include "xmcaug/types.hpp"

namespace xmcaug::augment {

enum class TargetKind { kGandalf, kSelfAnnotation, kGlas };
enum class GraphKind { kCooccurrence, kRandomWalk };
enum class SamplingScheme { kAll, kRandom, kTailBinned };

std::string to_string(TargetKind k);
std::string to_string(GraphKind k);
std::string to_string(SamplingScheme s);
TargetKind target_kind_from_string(const std::string& s);
GraphKind graph_kind_from_string(const std::string& s);
SamplingScheme sampling_scheme_from_string(const std::string& s);

struct AugmentConfig {
  double delta = 0.1;
  TargetKind target_kind = TargetKind::kGandalf;
  GraphKind graph_kind = GraphKind::kCooccurrence;
  double label_fraction = 1.0;
  SamplingScheme sampling_scheme = SamplingScheme::kAll;
  std::uint64_t seed = 0;
  graph::WalkParams walk;

  void validate() const;
};

// Soft targets for label j's feature text: conditionals G_ij / G_jj kept
// wherever they exceed delta. The self entry is always present with
// weight 1.
SparseRow gandalf_targets(const graph::CooccurrenceGraph& g, LabelIndex j,
                          double delta);

// Random-walk flavor of the same rule: walk scores in place of conditionals.
SparseRow gandalf_targets(const graph::WalkGraph& w, LabelIndex j,
                          double delta);

// One-hot row {j: 1}.
SparseRow self_annotation_targets(LabelIndex j);

// Logistic of the symmetrized similarity, for pairs with S_ij > delta.
// Thresholding happens before the logistic, so absent pairs stay absent
// instead of receiving sigma(0) = 0.5.
SparseRow glas_targets(const graph::CooccurrenceGraph& g, LabelIndex j,
                       double delta);

struct AugmentResult {
  Dataset z;
  std::size_t skipped_zero_frequency = 0;
  std::vector<LabelIndex> selected_labels;  // ascending, row j of z <-> [j]
};

// Builds the label-feature dataset: one row per selected label with
// positive frequency, instance text = that label's feature text, targets
// per cfg.target_kind, rows in ascending label order.
AugmentResult build_augmented(const Dataset& ds, const AugmentConfig& cfg);

// n rows sampled without replacement (seeded, order-preserving).
Dataset uniform_subsample(const Dataset& ds, std::size_t n,
                          std::uint64_t seed);

// Label subset for partial augmentation. kRandom keeps each positive-
// frequency label independently with probability `fraction`. kTailBinned
// splits positive-frequency labels (ascending frequency) into 5 bins of
// equal total positive volume and fills them tail-first up to
// ceil(fraction * active-count), sampling inside the boundary bin.
std::vector<LabelIndex> select_labels(const std::vector<std::uint64_t>& freq,
                                      double fraction, SamplingScheme scheme,
                                      std::uint64_t seed);

}  // namespace xmcaug::augment
