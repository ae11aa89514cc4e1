#include "xmcaug/augment.hpp"

#include <algorithm>
#include <cmath>

#include "xmcaug/errors.hpp"
#include "xmcaug/rng.hpp"

namespace xmcaug::augment {

std::string to_string(TargetKind k) {
  switch (k) {
    case TargetKind::kGandalf: return "gandalf";
    case TargetKind::kSelfAnnotation: return "self_annotation";
    case TargetKind::kGlas: return "glas";
  }
  return "?";
}

std::string to_string(GraphKind k) {
  return k == GraphKind::kCooccurrence ? "cooccurrence" : "random_walk";
}

std::string to_string(SamplingScheme s) {
  switch (s) {
    case SamplingScheme::kAll: return "all";
    case SamplingScheme::kRandom: return "random";
    case SamplingScheme::kTailBinned: return "tail_binned";
  }
  return "?";
}

TargetKind target_kind_from_string(const std::string& s) {
  if (s == "gandalf") return TargetKind::kGandalf;
  if (s == "self_annotation") return TargetKind::kSelfAnnotation;
  if (s == "glas") return TargetKind::kGlas;
  fail("InvalidConfig", "unknown target_kind '" + s + "'");
}

GraphKind graph_kind_from_string(const std::string& s) {
  if (s == "cooccurrence") return GraphKind::kCooccurrence;
  if (s == "random_walk") return GraphKind::kRandomWalk;
  fail("InvalidConfig", "unknown graph_kind '" + s + "'");
}

SamplingScheme sampling_scheme_from_string(const std::string& s) {
  if (s == "all") return SamplingScheme::kAll;
  if (s == "random") return SamplingScheme::kRandom;
  if (s == "tail_binned") return SamplingScheme::kTailBinned;
  fail("InvalidConfig", "unknown sampling_scheme '" + s + "'");
}

void AugmentConfig::validate() const {
  if (!(delta >= 0.0 && delta < 1.0))
    fail("InvalidConfig", "delta must be in [0, 1)");
  if (!(label_fraction > 0.0 && label_fraction <= 1.0))
    fail("InvalidConfig", "label_fraction must be in (0, 1]");
  if (sampling_scheme == SamplingScheme::kAll && label_fraction != 1.0)
    fail("InvalidConfig", "label_fraction must be 1 when sampling_scheme=all");
}

SparseRow gandalf_targets(const graph::CooccurrenceGraph& g, LabelIndex j,
                          double delta) {
  if (g.frequency(j) == 0)
    fail("ZeroFrequencyLabel", "label " + std::to_string(j));
  SparseRow row;
  const double n_j = static_cast<double>(g.frequency(j));
  for (const auto& [i, c] : g.neighbors(j)) {
    double p = static_cast<double>(c) / n_j;
    if (p > delta) row.emplace_back(i, p);
  }
  row.emplace_back(j, 1.0);
  std::sort(row.begin(), row.end());
  return row;
}

SparseRow gandalf_targets(const graph::WalkGraph& w, LabelIndex j,
                          double delta) {
  const auto& scores = w.row(j);
  if (scores.empty())
    fail("ZeroFrequencyLabel", "label " + std::to_string(j));
  SparseRow row;
  bool has_self = false;
  for (const auto& [i, s] : scores) {
    if (i == j) {
      row.emplace_back(j, 1.0);
      has_self = true;
    } else if (s > delta) {
      row.emplace_back(i, s);
    }
  }
  if (!has_self) {
    row.emplace_back(j, 1.0);
    std::sort(row.begin(), row.end());
  }
  return row;
}

SparseRow self_annotation_targets(LabelIndex j) { return {{j, 1.0}}; }

SparseRow glas_targets(const graph::CooccurrenceGraph& g, LabelIndex j,
                       double delta) {
  if (g.frequency(j) == 0)
    fail("ZeroFrequencyLabel", "label " + std::to_string(j));
  auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  SparseRow row;
  for (const auto& [i, c] : g.neighbors(j)) {
    double s = g.symmetrized_similarity(i, j);
    if (s > delta) row.emplace_back(i, sigmoid(s));
  }
  row.emplace_back(j, sigmoid(1.0));
  std::sort(row.begin(), row.end());
  return row;
}

AugmentResult build_augmented(const Dataset& ds, const AugmentConfig& cfg) {
  cfg.validate();
  if (!ds.y.is_hard())
    fail("SoftWeightsPresent", "augmentation requires hard source labels");

  auto g = graph::CooccurrenceGraph::build(ds.y);
  graph::WalkGraph walk;
  const bool use_walk = cfg.target_kind == TargetKind::kGandalf &&
                        cfg.graph_kind == GraphKind::kRandomWalk;
  if (use_walk) walk = graph::WalkGraph::build(g, cfg.walk);

  auto selected =
      select_labels(g.frequencies(), cfg.label_fraction, cfg.sampling_scheme,
                    cfg.seed);

  AugmentResult res;
  res.z.name = ds.name.empty() ? "Z" : ds.name + ".Z";
  res.z.label_features = ds.label_features;
  res.z.y.n_labels = ds.y.n_labels;
  for (LabelIndex j : selected) {
    SparseRow targets;
    switch (cfg.target_kind) {
      case TargetKind::kGandalf:
        targets = use_walk ? gandalf_targets(walk, j, cfg.delta)
                           : gandalf_targets(g, j, cfg.delta);
        break;
      case TargetKind::kSelfAnnotation:
        targets = self_annotation_targets(j);
        break;
      case TargetKind::kGlas:
        targets = glas_targets(g, j, cfg.delta);
        break;
    }
    res.z.instances.texts.push_back(ds.label_features.texts[j]);
    res.z.y.rows.push_back(std::move(targets));
    res.selected_labels.push_back(j);
  }

  std::size_t active = 0;
  for (auto f : g.frequencies())
    if (f > 0) ++active;
  res.skipped_zero_frequency = g.n_labels() - active;
  return res;
}

Dataset uniform_subsample(const Dataset& ds, std::size_t n,
                          std::uint64_t seed) {
  if (n > ds.n_rows())
    fail("SampleTooLarge", std::to_string(n) + " > " +
                               std::to_string(ds.n_rows()) + " rows");
  rng::Engine eng(seed);
  auto keep = rng::sample_indices(ds.n_rows(), n, eng);
  Dataset out;
  out.name = ds.name;
  out.label_features = ds.label_features;
  out.y.n_labels = ds.y.n_labels;
  out.instances.texts.reserve(n);
  out.y.rows.reserve(n);
  for (std::size_t idx : keep) {
    out.instances.texts.push_back(ds.instances.texts[idx]);
    out.y.rows.push_back(ds.y.rows[idx]);
  }
  return out;
}

std::vector<LabelIndex> select_labels(const std::vector<std::uint64_t>& freq,
                                      double fraction, SamplingScheme scheme,
                                      std::uint64_t seed) {
  std::vector<LabelIndex> active;
  for (LabelIndex l = 0; l < freq.size(); ++l)
    if (freq[l] > 0) active.push_back(l);

  if (scheme == SamplingScheme::kAll || fraction >= 1.0) return active;

  rng::Engine eng(seed);
  std::vector<LabelIndex> out;

  if (scheme == SamplingScheme::kRandom) {
    for (LabelIndex l : active)
      if (rng::next_unit(eng) < fraction) out.push_back(l);
    return out;
  }

  // Tail-binned: sort active labels ascending by frequency (ties by index),
  // cut into 5 bins of equal total positive volume, take whole bins from the
  // tail end, and sample the remainder inside the boundary bin.
  std::vector<LabelIndex> order = active;
  std::stable_sort(order.begin(), order.end(),
                   [&](LabelIndex a, LabelIndex b) {
                     if (freq[a] != freq[b]) return freq[a] < freq[b];
                     return a < b;
                   });
  std::uint64_t total_volume = 0;
  for (LabelIndex l : order) total_volume += freq[l];
  constexpr std::size_t kBins = 5;

  std::vector<std::vector<LabelIndex>> bins;
  {
    std::uint64_t cum = 0;
    std::size_t bin_id = 0;
    bins.emplace_back();
    for (LabelIndex l : order) {
      cum += freq[l];
      bins.back().push_back(l);
      // Close the bin once its share of the volume is reached.
      auto boundary = static_cast<std::uint64_t>(
          (static_cast<unsigned __int128>(total_volume) * (bin_id + 1)) /
          kBins);
      if (cum >= boundary && bin_id + 1 < kBins) {
        ++bin_id;
        bins.emplace_back();
      }
    }
  }

  std::size_t target = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(active.size())));
  for (auto& bin : bins) {
    if (target == 0) break;
    if (bin.size() <= target) {
      out.insert(out.end(), bin.begin(), bin.end());
      target -= bin.size();
    } else {
      auto picked = rng::sample_indices(bin.size(), target, eng);
      for (std::size_t idx : picked) out.push_back(bin[idx]);
      target = 0;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace xmcaug::augment
