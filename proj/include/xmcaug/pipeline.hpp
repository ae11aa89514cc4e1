#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xmcaug/augment.hpp"
#include "xmcaug/metrics.hpp"
#include "xmcaug/trainer.hpp"
#include "xmcaug/types.hpp"

namespace xmcaug::pipeline {

// Which composition of original and augmented data the trainer sees.
enum class TrainMode { kOriginal, kZOnly, kCombined, kCombinedSubsample };

std::string to_string(TrainMode m);
TrainMode train_mode_from_string(const std::string& s);

struct DatasetPaths {
  std::filesystem::path y;
  std::filesystem::path instances;
  std::filesystem::path label_features;
  std::filesystem::path test_y;
  std::filesystem::path test_instances;
  std::string name = "dataset";
};

struct EvalConfig {
  std::vector<std::size_t> ks = {1, 3, 5};
  double propensity_a = 0.55;
  double propensity_b = 1.5;
  std::size_t n_bins = 5;
};

struct PipelineConfig {
  DatasetPaths data;
  augment::AugmentConfig aug;
  trainer::TrainConfig train;
  trainer::FeaturizerConfig features;
  TrainMode mode = TrainMode::kCombined;
  std::uint64_t subsample_seed = 0;  // seed for the U(G, N) draw
  EvalConfig eval;
  std::size_t predict_top_k = 10;
  std::size_t workers = 1;
  std::filesystem::path output_dir = "out";

  static PipelineConfig from_json_file(const std::filesystem::path& path);
  std::string to_json() const;  // lossless round-trip representation
};

struct ValidationReport {
  std::size_t n_rows = 0;
  std::size_t n_labels = 0;
  std::size_t empty_rows = 0;
  double avg_points_per_label = 0.0;
  double avg_labels_per_point = 0.0;
  double avg_words_per_point = 0.0;

  std::string to_text() const;
};

Dataset load_train_dataset(const PipelineConfig& cfg);

ValidationReport cmd_validate(const PipelineConfig& cfg);

// Builds the co-occurrence graph and dumps it to <out>/graph.txt.
void cmd_graph(const PipelineConfig& cfg);

// Writes <out>/Z_X_Y.txt, <out>/Z.raw.txt and <out>/augment_manifest.json.
augment::AugmentResult cmd_augment(const PipelineConfig& cfg);

// Assembles the dataset for cfg.mode (consuming augment outputs when it
// needs them), trains, and writes <out>/model.bin.
void cmd_train(const PipelineConfig& cfg);

// Writes <out>/predictions.txt for the test split.
void cmd_predict(const PipelineConfig& cfg);

// Writes <out>/report.json and <out>/report.csv.
metrics::EvalReport cmd_eval(const PipelineConfig& cfg);

struct NeighborListing {
  LabelIndex label = 0;
  std::string text;
  std::vector<std::pair<LabelIndex, double>> neighbors;

  std::string to_text(const TextCorpus& label_features) const;
  std::string to_json(const TextCorpus& label_features) const;
};

// `query` is an exact label-feature text or a decimal index; lists the
// label plus its k strongest co-occurrence neighbors.
NeighborListing cmd_neighbors(const PipelineConfig& cfg,
                              const std::string& query, std::size_t k);

// validate + graph + augment + train + predict + eval.
metrics::EvalReport run_all(const PipelineConfig& cfg);

}  // namespace xmcaug::pipeline
