#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "xmcaug/metrics.hpp"
#include "xmcaug/types.hpp"

namespace xmcaug::trainer {

// Sparse L2-normalized feature vector, indices ascending.
using FeatureVec = std::vector<std::pair<std::uint32_t, double>>;

struct FeaturizerConfig {
  std::size_t hash_dim = 1u << 16;  // power of two
  bool bigrams = true;
};

// Feature-hashing tf-idf encoder over a lowercase whitespace tokenization
// with unigrams and (optionally) bigrams. Token hashing is FNV-1a, so the
// mapping is identical across platforms.
class Featurizer {
public:
  Featurizer() = default;

  // Learns per-bucket idf from document frequencies of the given corpus.
  static Featurizer fit(const TextCorpus& corpus, const FeaturizerConfig& cfg);

  // Deterministic sparse vector with L2 norm 1 (zero vector for texts with
  // no tokens).
  FeatureVec transform(std::string_view text) const;

  std::size_t hash_dim() const { return cfg_.hash_dim; }
  bool bigrams() const { return cfg_.bigrams; }
  const std::vector<double>& idf() const { return idf_; }

  // Raw hashed buckets of a text before tf-idf weighting; exposed for
  // collision auditing in tests.
  std::vector<std::uint32_t> buckets(std::string_view text) const;

private:
  friend class LinearOvAModel;
  FeaturizerConfig cfg_;
  std::vector<double> idf_;
};

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double learning_rate = 0.5;
  std::size_t negatives_per_instance = 10;
  std::uint64_t seed = 0;
};

// One-vs-all linear model: s_l(x) = <phi(x), w_l> + b_l with columns of W
// stored contiguously per label.
class LinearOvAModel {
public:
  LinearOvAModel() = default;
  LinearOvAModel(Featurizer feat, std::size_t n_labels);

  double score(const FeatureVec& phi, LabelIndex l) const;

  std::size_t n_labels() const { return n_labels_; }
  const Featurizer& featurizer() const { return feat_; }

  std::vector<double>& weights() { return w_; }
  const std::vector<double>& weights() const { return w_; }
  std::vector<double>& biases() { return b_; }
  const std::vector<double>& biases() const { return b_; }

  // Versioned binary checkpoint (header, dims, featurizer params + idf,
  // column-major W, biases).
  void save(const std::filesystem::path& path) const;
  static LinearOvAModel load(const std::filesystem::path& path);

private:
  Featurizer feat_;
  std::size_t n_labels_ = 0;
  std::vector<double> w_;  // hash_dim * n_labels, column-major per label
  std::vector<double> b_;
};

// One training example with its loss shortlist: every nonzero-target label
// is a shortlist positive; negatives are sampled uniformly per epoch.
struct ShortlistedExample {
  std::size_t instance = 0;
  std::vector<std::pair<LabelIndex, double>> shortlist;  // (label, target)
};

// Sum over the batch of BCE-with-logits terms; soft weights are used
// directly as targets.
double batch_loss(const LinearOvAModel& model,
                  const std::vector<FeatureVec>& features,
                  const std::vector<ShortlistedExample>& batch);

// Gradient of batch_loss with respect to the touched weight columns and
// biases, as (label, d_bias, sparse d_w) triples in batch order.
struct LabelGradient {
  LabelIndex label = 0;
  double d_bias = 0.0;
  FeatureVec d_weights;
};
std::vector<LabelGradient> batch_gradient(
    const LinearOvAModel& model, const std::vector<FeatureVec>& features,
    const std::vector<ShortlistedExample>& batch);

// Seeded mini-batch SGD over shortlisted BCE. Bit-reproducible for a given
// (dataset, config) pair.
LinearOvAModel train(const Dataset& ds, const TrainConfig& cfg,
                     const FeaturizerConfig& feat_cfg);

// Exact top-k scores per text over a full label scan, ties broken by
// ascending label index. Deterministic for any worker count.
metrics::Predictions predict(const LinearOvAModel& model,
                             const TextCorpus& texts, std::size_t top_k,
                             std::size_t workers = 1);

}  // namespace xmcaug::trainer
