#pragma once

#include <cstdint>

#include "xmcaug/types.hpp"

namespace xmcaug::testsupport {

// Seeded synthetic short-text XMC benchmark with Zipf-ish label frequencies
// and clustered label correlations:
//  - n_labels labels in n_clusters correlated clusters (label l sits in
//    cluster l % n_clusters at depth l / n_clusters; deeper = rarer),
//  - per-label positive caps shrink with the global rank so the bottom half
//    of labels by frequency ends up with <= 3 training positives,
//  - instance text is the stem tokens of its positive labels plus the
//    cluster token plus noise tokens; label feature text is the label's
//    stem plus its cluster token.
struct SyntheticSpec {
  std::size_t n_train = 2000;
  std::size_t n_test = 500;
  std::size_t n_labels = 400;
  std::size_t n_clusters = 80;
  std::size_t noise_vocab = 50;
  std::size_t noise_tokens = 5;
  // Chance that a non-head relevant label is "implicit": missing from the
  // training annotation (its stem stays in the text) or missing from the
  // test text (while staying relevant). Tail supervision becomes scarce
  // and partly contradictory, as in under-annotated corpora.
  double miss_prob = 0.75;
  std::uint64_t seed = 1;
};

struct SyntheticData {
  Dataset train;
  Dataset test;  // shares label_features with train
};

SyntheticData make_synthetic(const SyntheticSpec& spec);

}  // namespace xmcaug::testsupport
