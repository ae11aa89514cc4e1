#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xmcaug/types.hpp"

namespace xmcaug::metrics {

// Per test instance: top-K (label, score) sorted by descending score,
// ties by ascending label index.
struct Predictions {
  std::size_t depth = 0;  // K
  std::vector<std::vector<std::pair<LabelIndex, double>>> rows;

  std::size_t n_rows() const { return rows.size(); }
  void validate() const;
};

// File format: header "N K", then per line K "label:score" entries in
// descending score order.
Predictions read_predictions(const std::filesystem::path& path);
void write_predictions(const Predictions& pred,
                       const std::filesystem::path& path);

// Inverse-propensity weights for PSP@k (Jain et al. model):
//   p_l = 1 / (1 + C * (n_l + B)^-A),  C = (ln N - 1) * (1 + B)^A
struct PropensityVector {
  std::vector<double> p;
  double a = 0.55;
  double b = 1.5;
  std::size_t n_train = 0;
};

PropensityVector build_propensities(const SparseLabelMatrix& train_truth,
                                    double a, double b);

// Mean over instances of |top-k hits| / k.
double precision_at_k(const Predictions& pred, const SparseLabelMatrix& truth,
                      std::size_t k);

// Propensity-scored precision, normalized by the per-instance ideal ranking
// (positives sorted by descending 1/p_l); in [0, 1], 1 for ideal predictions.
double psp_at_k(const Predictions& pred, const SparseLabelMatrix& truth,
                const PropensityVector& prop, std::size_t k);

// Fraction of test-positive labels that get at least one correct top-k
// prediction. With count_any_prediction the correctness requirement is
// dropped (non-default alternative reading of coverage).
double coverage_at_k(const Predictions& pred, const SparseLabelMatrix& truth,
                     std::size_t k, bool count_any_prediction = false);

struct BinRow {
  std::size_t label_count = 0;
  double mean_positives = 0.0;   // mean train frequency of the bin's labels
  double contribution = 0.0;     // additive share of P@k
};

// Labels sorted by ascending train frequency (ties by index) are split into
// n_bins of equal total positive volume; each bin's contribution is its
// share of top-k hits. Contributions sum exactly to P@k.
std::vector<BinRow> bin_contributions(const Predictions& pred,
                                      const SparseLabelMatrix& truth,
                                      const std::vector<std::uint64_t>& train_freq,
                                      std::size_t n_bins, std::size_t k);

struct EvalReport {
  std::map<std::string, double> values;  // "P@1", "PSP@3", "C@5", ...
  std::optional<std::vector<BinRow>> bins;

  std::string to_json() const;  // sorted keys, deterministic bytes
  std::string to_csv() const;   // conventional column order P@k then PSP@k then C@k
};

EvalReport evaluate(const Predictions& pred, const SparseLabelMatrix& truth,
                    const PropensityVector& prop,
                    const std::vector<std::uint64_t>& train_freq,
                    const std::vector<std::size_t>& ks, std::size_t n_bins);

}  // namespace xmcaug::metrics
