#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "synthetic.hpp"
#include "xmcaug/dataset_io.hpp"
#include "xmcaug/errors.hpp"
#include "xmcaug/pipeline.hpp"

using namespace xmcaug;
using namespace xmcaug::pipeline;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Writes a small dataset to disk and returns a config pointing at it.
struct Fixture {
  std::filesystem::path dir;
  PipelineConfig cfg;

  explicit Fixture(const std::string& tag) {
    dir = std::filesystem::temp_directory_path() / ("xmcaug_pipe_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);

    testsupport::SyntheticSpec spec;
    spec.n_train = 120;
    spec.n_test = 40;
    spec.n_labels = 30;
    spec.n_clusters = 6;
    spec.seed = 77;
    auto data = testsupport::make_synthetic(spec);

    io::write_label_matrix(data.train.y, dir / "trn_X_Y.txt");
    io::write_text_corpus(data.train.instances, dir / "trn.raw.txt");
    io::write_text_corpus(data.train.label_features, dir / "lbl.raw.txt");
    io::write_label_matrix(data.test.y, dir / "tst_X_Y.txt");
    io::write_text_corpus(data.test.instances, dir / "tst.raw.txt");

    cfg.data.y = dir / "trn_X_Y.txt";
    cfg.data.instances = dir / "trn.raw.txt";
    cfg.data.label_features = dir / "lbl.raw.txt";
    cfg.data.test_y = dir / "tst_X_Y.txt";
    cfg.data.test_instances = dir / "tst.raw.txt";
    cfg.data.name = "fixture";
    cfg.train.epochs = 3;
    cfg.train.batch_size = 16;
    cfg.train.negatives_per_instance = 5;
    cfg.features.hash_dim = 1u << 9;
    cfg.predict_top_k = 5;
    cfg.output_dir = dir / "out";
  }
};

}  // namespace

TEST_CASE("config round-trips through its JSON representation") {
  Fixture fx("config");
  auto json_path = fx.dir / "config.json";
  {
    std::ofstream out(json_path);
    out << fx.cfg.to_json();
  }
  auto loaded = PipelineConfig::from_json_file(json_path);
  CHECK(loaded.to_json() == fx.cfg.to_json());
  CHECK(loaded.data.y == fx.cfg.data.y);
  CHECK(loaded.train.epochs == fx.cfg.train.epochs);
  CHECK(loaded.features.hash_dim == fx.cfg.features.hash_dim);
}

TEST_CASE("validate reports hand-computable stats") {
  auto dir = std::filesystem::temp_directory_path() / "xmcaug_pipe_stats";
  std::filesystem::create_directories(dir);
  {
    std::ofstream y(dir / "y.txt");
    y << "3 2\n0:1 1:1\n0:1\n\n";
    std::ofstream inst(dir / "inst.txt");
    inst << "two words\nthree small words\none\n";
    std::ofstream lbl(dir / "lbl.txt");
    lbl << "a\nb\n";
  }
  PipelineConfig cfg;
  cfg.data.y = dir / "y.txt";
  cfg.data.instances = dir / "inst.txt";
  cfg.data.label_features = dir / "lbl.txt";
  auto rep = cmd_validate(cfg);
  CHECK(rep.n_rows == 3);
  CHECK(rep.n_labels == 2);
  CHECK(rep.empty_rows == 1);
  CHECK(rep.avg_points_per_label == doctest::Approx(1.5));       // 3 nnz / 2
  CHECK(rep.avg_labels_per_point == doctest::Approx(1.0));       // 3 nnz / 3
  CHECK(rep.avg_words_per_point == doctest::Approx(2.0));        // 6 words / 3
  CHECK(rep.to_text().find("APpL 1.500000") != std::string::npos);
}

TEST_CASE("validate surfaces a corrupted header") {
  auto dir = std::filesystem::temp_directory_path() / "xmcaug_pipe_bad";
  std::filesystem::create_directories(dir);
  {
    std::ofstream y(dir / "y.txt");
    y << "not a header\n";
    std::ofstream inst(dir / "inst.txt");
    std::ofstream lbl(dir / "lbl.txt");
  }
  PipelineConfig cfg;
  cfg.data.y = dir / "y.txt";
  cfg.data.instances = dir / "inst.txt";
  cfg.data.label_features = dir / "lbl.txt";
  try {
    cmd_validate(cfg);
    FAIL("expected MalformedHeader");
  } catch (const Error& e) {
    CHECK(e.kind() == "MalformedHeader");
  }
}

TEST_CASE("augment writes matrix, texts, and manifest") {
  Fixture fx("augment");
  auto res = cmd_augment(fx.cfg);
  CHECK(std::filesystem::exists(fx.cfg.output_dir / "Z_X_Y.txt"));
  CHECK(std::filesystem::exists(fx.cfg.output_dir / "Z.raw.txt"));

  auto manifest = slurp(fx.cfg.output_dir / "augment_manifest.json");
  CHECK(manifest.find("\"delta\": 0.1") != std::string::npos);
  CHECK(manifest.find("\"target_kind\": \"gandalf\"") != std::string::npos);
  CHECK(manifest.find("\"rows\": " + std::to_string(res.z.n_rows())) !=
        std::string::npos);

  // Output parses back and matches the in-memory augmented matrix shape.
  auto z = io::read_label_matrix(fx.cfg.output_dir / "Z_X_Y.txt");
  CHECK(z.n_rows() == res.z.n_rows());
  CHECK(z.n_labels == res.z.y.n_labels);
}

TEST_CASE("augment rerun is byte-identical") {
  Fixture fx("augment_det");
  cmd_augment(fx.cfg);
  auto first_y = slurp(fx.cfg.output_dir / "Z_X_Y.txt");
  auto first_manifest = slurp(fx.cfg.output_dir / "augment_manifest.json");
  cmd_augment(fx.cfg);
  CHECK(slurp(fx.cfg.output_dir / "Z_X_Y.txt") == first_y);
  CHECK(slurp(fx.cfg.output_dir / "augment_manifest.json") == first_manifest);
}

TEST_CASE("run_all produces the full report with the expected schema") {
  Fixture fx("runall");
  auto report = run_all(fx.cfg);
  for (const char* key : {"P@1", "P@3", "P@5", "PSP@1", "PSP@3", "PSP@5",
                          "C@1", "C@3", "C@5"})
    CHECK(report.values.count(key) == 1);
  CHECK(report.values.size() == 9);
  REQUIRE(report.bins.has_value());
  CHECK(report.bins->size() == fx.cfg.eval.n_bins);
  CHECK(std::filesystem::exists(fx.cfg.output_dir / "report.json"));
  CHECK(std::filesystem::exists(fx.cfg.output_dir / "report.csv"));
  CHECK(std::filesystem::exists(fx.cfg.output_dir / "graph.txt"));
  for (const auto& [name, value] : report.values) {
    CHECK(value >= 0.0);
    CHECK(value <= 1.0);
  }
}

TEST_CASE("train mode original equals training on the raw dataset") {
  Fixture fx("orig");
  fx.cfg.mode = TrainMode::kOriginal;
  cmd_train(fx.cfg);
  auto direct = trainer::train(load_train_dataset(fx.cfg), fx.cfg.train,
                               fx.cfg.features);
  auto via_cmd = trainer::LinearOvAModel::load(fx.cfg.output_dir / "model.bin");
  CHECK(via_cmd.weights() == direct.weights());
  CHECK(via_cmd.biases() == direct.biases());
}

TEST_CASE("train mode z_only consumes exactly the augmented rows") {
  Fixture fx("zonly");
  auto res = cmd_augment(fx.cfg);
  fx.cfg.mode = TrainMode::kZOnly;
  cmd_train(fx.cfg);  // consumes Z files written above

  Dataset z;
  z.label_features = load_train_dataset(fx.cfg).label_features;
  z.y = io::read_label_matrix(fx.cfg.output_dir / "Z_X_Y.txt");
  z.instances = io::read_text_corpus(fx.cfg.output_dir / "Z.raw.txt");
  CHECK(z.n_rows() == res.z.n_rows());
  auto direct = trainer::train(z, fx.cfg.train, fx.cfg.features);
  auto via_cmd = trainer::LinearOvAModel::load(fx.cfg.output_dir / "model.bin");
  CHECK(via_cmd.weights() == direct.weights());
}

TEST_CASE("neighbors resolves by text and by index") {
  Fixture fx("nbrs");
  auto ds = load_train_dataset(fx.cfg);
  auto by_text = cmd_neighbors(fx.cfg, ds.label_features.texts[0], 3);
  CHECK(by_text.label == 0);
  CHECK(by_text.neighbors.size() <= 4);
  REQUIRE_FALSE(by_text.neighbors.empty());
  CHECK(by_text.neighbors[0].first == 0);
  CHECK(by_text.neighbors[0].second == 1.0);

  auto by_index = cmd_neighbors(fx.cfg, "0", 3);
  CHECK(by_index.neighbors == by_text.neighbors);

  // k = 0 keeps only the label itself.
  auto self_only = cmd_neighbors(fx.cfg, "0", 0);
  CHECK(self_only.neighbors.size() == 1);

  CHECK_THROWS_AS(cmd_neighbors(fx.cfg, "no such label", 3), Error);
}
