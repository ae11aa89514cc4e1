#include "xmcaug/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "xmcaug/dataset_io.hpp"
#include "xmcaug/errors.hpp"
#include "xmcaug/label_graph.hpp"
#include "xmcaug/rng.hpp"

namespace xmcaug::pipeline {

using nlohmann::json;

std::string to_string(TrainMode m) {
  switch (m) {
    case TrainMode::kOriginal: return "original";
    case TrainMode::kZOnly: return "z_only";
    case TrainMode::kCombined: return "combined";
    case TrainMode::kCombinedSubsample: return "combined_subsample";
  }
  return "?";
}

TrainMode train_mode_from_string(const std::string& s) {
  if (s == "original") return TrainMode::kOriginal;
  if (s == "z_only") return TrainMode::kZOnly;
  if (s == "combined") return TrainMode::kCombined;
  if (s == "combined_subsample") return TrainMode::kCombinedSubsample;
  fail("InvalidConfig", "unknown train mode '" + s + "'");
}

namespace {

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("IoError", "cannot open " + path.string() + " for writing");
  out << body;
  if (!out) fail("IoError", "write failed: " + path.string());
}

json walk_to_json(const graph::WalkParams& w) {
  return {{"alpha", w.restart_prob},
          {"steps", w.walk_length},
          {"top_k", w.top_k_per_node}};
}

}  // namespace

PipelineConfig PipelineConfig::from_json_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("IoError", "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail("InvalidConfig", path.string() + ": " + e.what());
  }

  PipelineConfig cfg;
  const auto& d = j.at("dataset");
  cfg.data.y = d.at("y").get<std::string>();
  cfg.data.instances = d.at("instances").get<std::string>();
  cfg.data.label_features = d.at("label_features").get<std::string>();
  if (d.contains("test_y")) cfg.data.test_y = d.at("test_y").get<std::string>();
  if (d.contains("test_instances"))
    cfg.data.test_instances = d.at("test_instances").get<std::string>();
  cfg.data.name = d.value("name", std::string("dataset"));

  if (j.contains("augment")) {
    const auto& a = j.at("augment");
    cfg.aug.delta = a.value("delta", cfg.aug.delta);
    cfg.aug.target_kind = augment::target_kind_from_string(
        a.value("target_kind", std::string("gandalf")));
    cfg.aug.graph_kind = augment::graph_kind_from_string(
        a.value("graph_kind", std::string("cooccurrence")));
    cfg.aug.label_fraction = a.value("label_fraction", 1.0);
    cfg.aug.sampling_scheme = augment::sampling_scheme_from_string(
        a.value("sampling_scheme", std::string("all")));
    cfg.aug.seed = a.value("seed", std::uint64_t{0});
    if (a.contains("walk")) {
      const auto& w = a.at("walk");
      cfg.aug.walk.restart_prob = w.value("alpha", cfg.aug.walk.restart_prob);
      cfg.aug.walk.walk_length = w.value("steps", cfg.aug.walk.walk_length);
      cfg.aug.walk.top_k_per_node =
          w.value("top_k", cfg.aug.walk.top_k_per_node);
    }
  }

  if (j.contains("train")) {
    const auto& t = j.at("train");
    cfg.train.epochs = t.value("epochs", cfg.train.epochs);
    cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
    cfg.train.learning_rate =
        t.value("learning_rate", cfg.train.learning_rate);
    cfg.train.negatives_per_instance = t.value(
        "negatives_per_instance", cfg.train.negatives_per_instance);
    cfg.train.seed = t.value("seed", std::uint64_t{0});
    cfg.features.hash_dim = t.value("hash_dim", cfg.features.hash_dim);
    cfg.features.bigrams = t.value("bigrams", cfg.features.bigrams);
    cfg.mode =
        train_mode_from_string(t.value("mode", std::string("combined")));
    cfg.subsample_seed = t.value("subsample_seed", std::uint64_t{0});
  }

  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    if (e.contains("ks")) cfg.eval.ks = e.at("ks").get<std::vector<std::size_t>>();
    cfg.eval.propensity_a = e.value("propensity_A", cfg.eval.propensity_a);
    cfg.eval.propensity_b = e.value("propensity_B", cfg.eval.propensity_b);
    cfg.eval.n_bins = e.value("n_bins", cfg.eval.n_bins);
  }

  cfg.predict_top_k = j.value("predict_top_k", cfg.predict_top_k);
  cfg.workers = j.value("workers", cfg.workers);
  cfg.output_dir = j.value("output_dir", std::string("out"));
  cfg.aug.validate();
  return cfg;
}

std::string PipelineConfig::to_json() const {
  json j;
  j["dataset"] = {{"y", data.y.string()},
                  {"instances", data.instances.string()},
                  {"label_features", data.label_features.string()},
                  {"test_y", data.test_y.string()},
                  {"test_instances", data.test_instances.string()},
                  {"name", data.name}};
  j["augment"] = {{"delta", aug.delta},
                  {"target_kind", augment::to_string(aug.target_kind)},
                  {"graph_kind", augment::to_string(aug.graph_kind)},
                  {"label_fraction", aug.label_fraction},
                  {"sampling_scheme", augment::to_string(aug.sampling_scheme)},
                  {"seed", aug.seed},
                  {"walk", walk_to_json(aug.walk)}};
  j["train"] = {{"epochs", train.epochs},
                {"batch_size", train.batch_size},
                {"learning_rate", train.learning_rate},
                {"negatives_per_instance", train.negatives_per_instance},
                {"seed", train.seed},
                {"hash_dim", features.hash_dim},
                {"bigrams", features.bigrams},
                {"mode", to_string(mode)},
                {"subsample_seed", subsample_seed}};
  j["eval"] = {{"ks", eval.ks},
               {"propensity_A", eval.propensity_a},
               {"propensity_B", eval.propensity_b},
               {"n_bins", eval.n_bins}};
  j["predict_top_k"] = predict_top_k;
  j["workers"] = workers;
  j["output_dir"] = output_dir.string();
  return j.dump(2) + "\n";
}

Dataset load_train_dataset(const PipelineConfig& cfg) {
  Dataset ds;
  ds.name = cfg.data.name;
  ds.y = io::read_label_matrix(cfg.data.y);
  ds.instances = io::read_text_corpus(cfg.data.instances);
  ds.label_features = io::read_text_corpus(cfg.data.label_features);
  ds.validate();
  return ds;
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  out << "N " << n_rows << "\n"
      << "L " << n_labels << "\n"
      << "empty_rows " << empty_rows << "\n"
      << "APpL " << fixed6(avg_points_per_label) << "\n"
      << "ALpP " << fixed6(avg_labels_per_point) << "\n"
      << "AWpP " << fixed6(avg_words_per_point) << "\n";
  return out.str();
}

ValidationReport cmd_validate(const PipelineConfig& cfg) {
  Dataset ds = load_train_dataset(cfg);
  ValidationReport rep;
  rep.n_rows = ds.n_rows();
  rep.n_labels = ds.n_labels();
  std::size_t nnz = 0;
  for (const auto& row : ds.y.rows) {
    if (row.empty()) ++rep.empty_rows;
    nnz += row.size();
  }
  rep.avg_points_per_label =
      static_cast<double>(nnz) / static_cast<double>(rep.n_labels);
  rep.avg_labels_per_point =
      static_cast<double>(nnz) / static_cast<double>(rep.n_rows);
  std::size_t words = 0;
  for (const auto& text : ds.instances.texts) {
    bool in_word = false;
    for (char c : text) {
      bool space = c == ' ' || c == '\t';
      if (!space && !in_word) ++words;
      in_word = !space;
    }
  }
  rep.avg_words_per_point =
      static_cast<double>(words) / static_cast<double>(rep.n_rows);
  return rep;
}

void cmd_graph(const PipelineConfig& cfg) {
  Dataset ds = load_train_dataset(cfg);
  auto g = graph::CooccurrenceGraph::build(ds.y);
  std::filesystem::create_directories(cfg.output_dir);
  g.dump(cfg.output_dir / "graph.txt");
}

augment::AugmentResult cmd_augment(const PipelineConfig& cfg) {
  Dataset ds = load_train_dataset(cfg);
  auto res = augment::build_augmented(ds, cfg.aug);
  std::filesystem::create_directories(cfg.output_dir);
  io::write_label_matrix(res.z.y, cfg.output_dir / "Z_X_Y.txt");
  io::write_text_corpus(res.z.instances, cfg.output_dir / "Z.raw.txt");

  json manifest;
  manifest["delta"] = cfg.aug.delta;
  manifest["target_kind"] = augment::to_string(cfg.aug.target_kind);
  manifest["graph_kind"] = augment::to_string(cfg.aug.graph_kind);
  manifest["label_fraction"] = cfg.aug.label_fraction;
  manifest["sampling_scheme"] = augment::to_string(cfg.aug.sampling_scheme);
  manifest["seed"] = cfg.aug.seed;
  manifest["rng"] = rng::kAlgorithmName;
  manifest["walk"] = walk_to_json(cfg.aug.walk);
  manifest["rows"] = res.z.n_rows();
  manifest["skipped_zero_frequency_labels"] = res.skipped_zero_frequency;
  manifest["source"] = cfg.data.name;
  write_file(cfg.output_dir / "augment_manifest.json",
             manifest.dump(2) + "\n");
  return res;
}

namespace {

Dataset assemble_training_data(const PipelineConfig& cfg, const Dataset& ds) {
  if (cfg.mode == TrainMode::kOriginal) return ds;

  Dataset z;
  z.name = "Z";
  z.label_features = ds.label_features;
  z.y = io::read_label_matrix(cfg.output_dir / "Z_X_Y.txt");
  z.instances = io::read_text_corpus(cfg.output_dir / "Z.raw.txt");
  z.validate();

  switch (cfg.mode) {
    case TrainMode::kZOnly:
      return z;
    case TrainMode::kCombined:
      return io::concat_datasets(ds, z);
    case TrainMode::kCombinedSubsample: {
      Dataset g = io::concat_datasets(ds, z);
      return augment::uniform_subsample(g, ds.n_rows(), cfg.subsample_seed);
    }
    default:
      return ds;
  }
}

}  // namespace

void cmd_train(const PipelineConfig& cfg) {
  Dataset ds = load_train_dataset(cfg);
  Dataset training = assemble_training_data(cfg, ds);
  auto model = trainer::train(training, cfg.train, cfg.features);
  std::filesystem::create_directories(cfg.output_dir);
  model.save(cfg.output_dir / "model.bin");
}

void cmd_predict(const PipelineConfig& cfg) {
  if (cfg.data.test_instances.empty())
    fail("InvalidConfig", "predict requires dataset.test_instances");
  auto model = trainer::LinearOvAModel::load(cfg.output_dir / "model.bin");
  auto texts = io::read_text_corpus(cfg.data.test_instances);
  std::size_t top_k = std::min(cfg.predict_top_k, model.n_labels());
  auto pred = trainer::predict(model, texts, top_k, cfg.workers);
  std::filesystem::create_directories(cfg.output_dir);
  metrics::write_predictions(pred, cfg.output_dir / "predictions.txt");
}

metrics::EvalReport cmd_eval(const PipelineConfig& cfg) {
  if (cfg.data.test_y.empty())
    fail("InvalidConfig", "eval requires dataset.test_y");
  auto train_truth = io::read_label_matrix(cfg.data.y);
  auto test_truth = io::read_label_matrix(cfg.data.test_y);
  auto pred = metrics::read_predictions(cfg.output_dir / "predictions.txt");
  auto prop = metrics::build_propensities(train_truth, cfg.eval.propensity_a,
                                          cfg.eval.propensity_b);
  auto report =
      metrics::evaluate(pred, test_truth, prop, train_truth.label_frequencies(),
                        cfg.eval.ks, cfg.eval.n_bins);
  std::filesystem::create_directories(cfg.output_dir);
  write_file(cfg.output_dir / "report.json", report.to_json());
  write_file(cfg.output_dir / "report.csv", report.to_csv());
  return report;
}

std::string NeighborListing::to_text(const TextCorpus& label_features) const {
  std::ostringstream out;
  out << label << " " << text << "\n";
  for (const auto& [l, p] : neighbors)
    out << "  " << l << " " << fixed6(p) << " "
        << label_features.texts[l] << "\n";
  return out.str();
}

std::string NeighborListing::to_json(const TextCorpus& label_features) const {
  json j;
  j["label"] = label;
  j["text"] = text;
  j["neighbors"] = json::array();
  for (const auto& [l, p] : neighbors)
    j["neighbors"].push_back({{"label", l},
                              {"conditional", p},
                              {"text", label_features.texts[l]}});
  return j.dump(2) + "\n";
}

NeighborListing cmd_neighbors(const PipelineConfig& cfg,
                              const std::string& query, std::size_t k) {
  Dataset ds = load_train_dataset(cfg);
  auto g = graph::CooccurrenceGraph::build(ds.y);

  LabelIndex label = 0;
  bool resolved = false;
  for (LabelIndex l = 0; l < ds.n_labels(); ++l) {
    if (ds.label_features.texts[l] == query) {
      label = l;
      resolved = true;
      break;
    }
  }
  if (!resolved) {
    try {
      std::size_t pos = 0;
      unsigned long idx = std::stoul(query, &pos);
      if (pos == query.size() && idx < ds.n_labels()) {
        label = static_cast<LabelIndex>(idx);
        resolved = true;
      }
    } catch (const std::exception&) {
    }
  }
  if (!resolved) fail("UnknownLabel", "'" + query + "'");

  NeighborListing listing;
  listing.label = label;
  listing.text = ds.label_features.texts[label];
  listing.neighbors = g.top_neighbors(label, k + 1);
  return listing;
}

metrics::EvalReport run_all(const PipelineConfig& cfg) {
  cmd_validate(cfg);
  cmd_graph(cfg);
  cmd_augment(cfg);
  cmd_train(cfg);
  cmd_predict(cfg);
  return cmd_eval(cfg);
}

}  // namespace xmcaug::pipeline
