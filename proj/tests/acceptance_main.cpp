// End-to-end acceptance harness. Prints one PASS/FAIL line per criterion
// and exits nonzero if any required criterion fails. argv[1] must be the
// path to the pipeline CLI binary (used by the determinism criterion).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "xmcaug/augment.hpp"
#include "xmcaug/dataset_io.hpp"
#include "xmcaug/label_graph.hpp"
#include "xmcaug/metrics.hpp"
#include "xmcaug/pipeline.hpp"
#include "xmcaug/rng.hpp"
#include "xmcaug/trainer.hpp"
#include "xmcaug/types.hpp"

namespace fs = std::filesystem;
using namespace xmcaug;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, bool pass, const std::string& what,
            const std::string& detail) {
  std::printf("criterion %d: %s - %s (%s)\n", id, pass ? "PASS" : "FAIL",
              what.c_str(), detail.c_str());
  std::fflush(stdout);
}

void report_skip(int id, const std::string& what, const std::string& detail) {
  std::printf("criterion %d: SKIP - %s (%s)\n", id, what.c_str(),
              detail.c_str());
  std::fflush(stdout);
}

// ---------------------------------------------------------------------------
// 1. Co-occurrence counts equal the dense Y^T Y oracle on random matrices.

bool criterion_cooccurrence(std::string& detail) {
  auto t0 = Clock::now();
  rng::Engine eng(101);
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t n = 1 + rng::next_below(eng, 200);
    std::size_t l = 2 + rng::next_below(eng, 49);
    auto y = testsupport::random_hard_matrix(n, l, 0, std::min<std::size_t>(l, 8), eng);
    auto g = graph::CooccurrenceGraph::build(y);
    auto dense = testsupport::dense_cooccurrence(y);
    for (std::size_t i = 0; i < l; ++i) {
      if (g.frequency(static_cast<LabelIndex>(i)) != dense[i][i]) {
        detail = "diagonal mismatch, trial " + std::to_string(trial);
        return false;
      }
      for (std::size_t j = 0; j < l; ++j) {
        if (i == j) continue;
        if (g.count(static_cast<LabelIndex>(i), static_cast<LabelIndex>(j)) !=
            dense[i][j]) {
          detail = "count mismatch, trial " + std::to_string(trial);
          return false;
        }
      }
    }
  }
  double dt = seconds_since(t0);
  detail = "1000 matrices, " + std::to_string(dt).substr(0, 4) + " s";
  return dt < 10.0;
}

// ---------------------------------------------------------------------------
// 2. Soft-target rows match a per-pair oracle; support shrinks as the
//    threshold grows.

bool criterion_gandalf_targets(std::string& detail) {
  rng::Engine eng(202);
  const double deltas[] = {0.0, 0.1, 0.2};
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t n = 5 + rng::next_below(eng, 60);
    std::size_t l = 3 + rng::next_below(eng, 20);
    auto y = testsupport::random_hard_matrix(n, l, 1, 4, eng);
    auto g = graph::CooccurrenceGraph::build(y);
    auto dense = testsupport::dense_cooccurrence(y);
    for (LabelIndex j = 0; j < static_cast<LabelIndex>(l); ++j) {
      if (dense[j][j] == 0) continue;
      std::size_t prev_support = l + 1;
      for (double delta : deltas) {
        auto row = augment::gandalf_targets(g, j, delta);
        // Oracle: conditional above delta, self pinned to 1.
        std::map<LabelIndex, double> expect;
        for (std::size_t i = 0; i < l; ++i) {
          double cond = static_cast<double>(dense[i][j]) /
                        static_cast<double>(dense[j][j]);
          if (i == j)
            expect[j] = 1.0;
          else if (cond > delta)
            expect[static_cast<LabelIndex>(i)] = cond;
        }
        if (row.size() != expect.size()) {
          detail = "support size mismatch, trial " + std::to_string(trial);
          return false;
        }
        for (const auto& [i, w] : row) {
          auto it = expect.find(i);
          if (it == expect.end() || it->second != w) {
            detail = "weight mismatch, trial " + std::to_string(trial);
            return false;
          }
        }
        if (row.size() > prev_support) {
          detail = "support grew with the threshold, trial " +
                   std::to_string(trial);
          return false;
        }
        prev_support = row.size();
      }
    }
  }
  detail = "500 graphs x deltas {0, 0.1, 0.2}";
  return true;
}

// ---------------------------------------------------------------------------
// 3. Ranking metrics match brute-force implementations.

bool criterion_metric_oracles(std::string& detail) {
  rng::Engine eng(303);
  const std::size_t ks[] = {1, 3, 5};
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t n = 1 + rng::next_below(eng, 50);
    std::size_t l = 6 + rng::next_below(eng, 25);
    auto truth = testsupport::random_hard_matrix(n, l, 1, 5, eng);
    auto pred = testsupport::random_predictions(n, l, 5, eng);

    // Propensities from a separate random "train" split.
    auto train = testsupport::random_hard_matrix(40, l, 1, 5, eng);
    auto prop = metrics::build_propensities(train, 0.55, 1.5);
    auto freq = train.label_frequencies();

    for (std::size_t k : ks) {
      double p = metrics::precision_at_k(pred, truth, k);
      double p_ref = testsupport::brute_precision_at_k(pred, truth, k);
      if (std::abs(p - p_ref) > 1e-12) {
        detail = "P@" + std::to_string(k) + " trial " + std::to_string(trial);
        return false;
      }
      double s = metrics::psp_at_k(pred, truth, prop, k);
      double s_ref = testsupport::brute_psp_at_k(pred, truth, prop.p, k);
      if (std::abs(s - s_ref) > 1e-12) {
        detail = "PSP@" + std::to_string(k) + " trial " + std::to_string(trial);
        return false;
      }
      double c = metrics::coverage_at_k(pred, truth, k);
      double c_ref = testsupport::brute_coverage_at_k(pred, truth, k);
      if (std::abs(c - c_ref) > 1e-12) {
        detail = "C@" + std::to_string(k) + " trial " + std::to_string(trial);
        return false;
      }
      auto bins = metrics::bin_contributions(pred, truth, freq, 5, k);
      double sum = 0.0;
      for (const auto& b : bins) sum += b.contribution;
      if (std::abs(sum - p) > 1e-12) {
        detail = "bin sum != P@" + std::to_string(k) + " trial " +
                 std::to_string(trial);
        return false;
      }
    }
  }
  detail = "1000 cases, k in {1,3,5}, tolerance 1e-12";
  return true;
}

// ---------------------------------------------------------------------------
// 4. Analytic batch gradient vs central finite differences.

bool criterion_gradient(std::string& detail) {
  rng::Engine eng(404);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dim = 64, n_labels = 6, n_inst = 4;
    trainer::FeaturizerConfig fc;
    fc.hash_dim = dim;
    TextCorpus corpus;
    for (std::size_t i = 0; i < n_inst; ++i) {
      std::string text;
      for (int t = 0; t < 6; ++t)
        text += "tok" + std::to_string(rng::next_below(eng, 40)) + " ";
      corpus.texts.push_back(text);
    }
    auto feat = trainer::Featurizer::fit(corpus, fc);
    trainer::LinearOvAModel model(feat, n_labels);
    for (auto& w : model.weights()) w = rng::next_unit(eng) - 0.5;
    for (auto& b : model.biases()) b = rng::next_unit(eng) - 0.5;

    std::vector<trainer::FeatureVec> features;
    for (const auto& line : corpus.texts)
      features.push_back(feat.transform(line));

    std::vector<trainer::ShortlistedExample> batch;
    for (std::size_t i = 0; i < n_inst; ++i) {
      trainer::ShortlistedExample ex;
      ex.instance = i;
      for (LabelIndex lab = 0; lab < n_labels; ++lab)
        if (rng::next_unit(eng) < 0.6)
          ex.shortlist.emplace_back(
              lab, rng::next_unit(eng) < 0.5 ? 0.0 : rng::next_unit(eng));
      if (ex.shortlist.empty()) ex.shortlist.emplace_back(0, 1.0);
      batch.push_back(std::move(ex));
    }

    // A label can contribute one triple per batch example; the loss
    // derivative is their sum, so aggregate before differencing.
    auto grads = trainer::batch_gradient(model, features, batch);
    std::map<LabelIndex, double> d_bias;
    std::map<std::pair<LabelIndex, std::uint32_t>, double> d_w;
    for (const auto& g : grads) {
      d_bias[g.label] += g.d_bias;
      for (const auto& [idx, dw] : g.d_weights) d_w[{g.label, idx}] += dw;
    }

    const double h = 1e-6;
    auto central = [&](double* slot) {
      double orig = *slot;
      *slot = orig + h;
      double lp = trainer::batch_loss(model, features, batch);
      *slot = orig - h;
      double lm = trainer::batch_loss(model, features, batch);
      *slot = orig;
      return (lp - lm) / (2 * h);
    };
    auto rel_err = [](double fd, double an) {
      return std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8});
    };
    for (const auto& [label, db] : d_bias)
      worst = std::max(worst, rel_err(central(&model.biases()[label]), db));
    for (const auto& [key, dw] : d_w)
      worst = std::max(
          worst,
          rel_err(central(&model.weights()[key.first * dim + key.second]), dw));
  }
  std::ostringstream os;
  os << "20 batches, worst relative error " << worst;
  detail = os.str();
  return worst < 1e-4;
}

// ---------------------------------------------------------------------------
// 5-7. Synthetic benchmark: train the same model on the original data and
// on each augmented composition, sweep seeds, compare PSP@5 / C@5.

struct VariantScores {
  double psp5 = 0.0;
  double c5 = 0.0;
};

struct SeedOutcome {
  VariantScores orig;        // D
  VariantScores z_only;      // Z
  VariantScores combined;    // G = D u Z
  VariantScores subsample;   // U(G, N)
  VariantScores self_comb;   // Z^1 u D
  // Subsampling-trend points (PSP@5): tail_binned at {0.25, 0.5, 0.75};
  // the 1.0 point is `combined`. `random25` is the random scheme at 0.25.
  double tail25 = 0.0, tail50 = 0.0, tail75 = 0.0, random25 = 0.0;
};

trainer::TrainConfig synthetic_train_config(std::uint64_t seed) {
  trainer::TrainConfig tc;
  tc.epochs = 20;
  tc.batch_size = 32;
  tc.learning_rate = 0.5;
  tc.negatives_per_instance = 10;
  tc.seed = seed;
  return tc;
}

VariantScores train_and_score(const Dataset& train_ds, const Dataset& test_ds,
                              const metrics::PropensityVector& prop,
                              std::uint64_t seed) {
  trainer::FeaturizerConfig fc;
  fc.hash_dim = 1u << 15;
  auto model = trainer::train(train_ds, synthetic_train_config(seed), fc);
  auto pred = trainer::predict(model, test_ds.instances, 5);
  VariantScores s;
  s.psp5 = metrics::psp_at_k(pred, test_ds.y, prop, 5);
  s.c5 = metrics::coverage_at_k(pred, test_ds.y, 5);
  return s;
}

SeedOutcome run_synthetic_seed(std::uint64_t seed) {
  testsupport::SyntheticSpec spec;
  spec.seed = seed;
  auto data = testsupport::make_synthetic(spec);
  auto prop = metrics::build_propensities(data.train.y, 0.55, 1.5);

  augment::AugmentConfig ac;
  ac.delta = 0.1;
  ac.seed = seed;
  auto z = augment::build_augmented(data.train, ac).z;
  auto g = io::concat_datasets(data.train, z);

  augment::AugmentConfig sa = ac;
  sa.target_kind = augment::TargetKind::kSelfAnnotation;
  auto z1 = augment::build_augmented(data.train, sa).z;

  SeedOutcome out;
  out.orig = train_and_score(data.train, data.test, prop, seed);
  out.z_only = train_and_score(z, data.test, prop, seed);
  out.combined = train_and_score(g, data.test, prop, seed);
  out.subsample = train_and_score(
      augment::uniform_subsample(g, data.train.n_rows(), seed), data.test,
      prop, seed);
  out.self_comb =
      train_and_score(io::concat_datasets(data.train, z1), data.test, prop, seed);

  auto fraction_run = [&](double fraction, augment::SamplingScheme scheme) {
    augment::AugmentConfig fc = ac;
    fc.label_fraction = fraction;
    fc.sampling_scheme = scheme;
    auto zf = augment::build_augmented(data.train, fc).z;
    return train_and_score(io::concat_datasets(data.train, zf), data.test,
                           prop, seed)
        .psp5;
  };
  out.tail25 = fraction_run(0.25, augment::SamplingScheme::kTailBinned);
  out.tail50 = fraction_run(0.50, augment::SamplingScheme::kTailBinned);
  out.tail75 = fraction_run(0.75, augment::SamplingScheme::kTailBinned);
  out.random25 = fraction_run(0.25, augment::SamplingScheme::kRandom);
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

bool criterion_gandalf_effect(const std::vector<SeedOutcome>& runs,
                              double elapsed, std::string& detail) {
  int g_wins = 0, z_wins = 0, u_wins = 0, z1_wins = 0;
  double gain_sum = 0.0;
  for (const auto& r : runs) {
    if (r.combined.psp5 > r.orig.psp5) ++g_wins;
    if (r.z_only.psp5 > r.orig.psp5) ++z_wins;
    if (r.subsample.psp5 > r.orig.psp5) ++u_wins;
    if (r.self_comb.psp5 > r.orig.psp5) ++z1_wins;
    gain_sum += (r.combined.psp5 - r.orig.psp5) / r.orig.psp5;
  }
  double mean_gain = gain_sum / static_cast<double>(runs.size());
  std::ostringstream os;
  os << "combined " << g_wins << "/10 mean gain " << fmt(mean_gain)
     << ", z-only " << z_wins << "/10, subsampled " << u_wins
     << "/10, self-annot " << z1_wins << "/10, " << fmt(elapsed) << " s";
  detail = os.str();
  return g_wins >= 9 && mean_gain >= 0.10 && z_wins >= 7 && u_wins >= 7 &&
         z1_wins >= 6 && elapsed < 300.0;
}

double spearman4(const double v[4]) {
  // Ranks with average ties over 4 points against the identity ranking.
  double rank[4];
  for (int i = 0; i < 4; ++i) {
    double less = 0, equal = 0;
    for (int j = 0; j < 4; ++j) {
      if (v[j] < v[i]) ++less;
      if (v[j] == v[i]) ++equal;
    }
    rank[i] = less + (equal + 1) / 2.0;
  }
  const double x[4] = {1, 2, 3, 4};
  double mx = 2.5, my = (rank[0] + rank[1] + rank[2] + rank[3]) / 4.0;
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 4; ++i) {
    sxy += (x[i] - mx) * (rank[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (rank[i] - my) * (rank[i] - my);
  }
  if (syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

bool criterion_subsampling_trend(const std::vector<SeedOutcome>& runs,
                                 std::string& detail) {
  double rho_sum = 0.0;
  int tail_wins = 0;
  for (const auto& r : runs) {
    double pts[4] = {r.tail25, r.tail50, r.tail75, r.combined.psp5};
    rho_sum += spearman4(pts);
    if (r.tail25 >= r.random25) ++tail_wins;
  }
  double rho = rho_sum / static_cast<double>(runs.size());
  std::ostringstream os;
  os << "mean Spearman rho " << fmt(rho) << ", tail_binned >= random at 0.25 in "
     << tail_wins << "/10";
  detail = os.str();
  return rho > 0.0 && tail_wins >= 7;
}

bool criterion_coverage(const std::vector<SeedOutcome>& runs,
                        std::string& detail) {
  int wins = 0;
  double d_sum = 0, g_sum = 0;
  for (const auto& r : runs) {
    if (r.combined.c5 > r.orig.c5) ++wins;
    d_sum += r.orig.c5;
    g_sum += r.combined.c5;
  }
  std::ostringstream os;
  os << "C@5 combined > original in " << wins << "/10 (mean "
     << fmt(g_sum / runs.size()) << " vs " << fmt(d_sum / runs.size()) << ")";
  detail = os.str();
  return wins >= 8;
}

// ---------------------------------------------------------------------------
// 8. Byte determinism of the CLI pipeline, round trips, worker invariance.

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool dirs_identical(const fs::path& a, const fs::path& b, std::string& why) {
  std::set<std::string> names_a, names_b;
  for (const auto& e : fs::directory_iterator(a))
    names_a.insert(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(b))
    names_b.insert(e.path().filename().string());
  if (names_a != names_b) {
    why = "file lists differ";
    return false;
  }
  for (const auto& n : names_a) {
    if (slurp(a / n) != slurp(b / n)) {
      why = n + " differs";
      return false;
    }
  }
  return true;
}

int run_cli(const std::string& cli, const std::string& args) {
  std::string cmd = cli + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

bool criterion_determinism(const std::string& cli, std::string& detail) {
  auto root = fs::temp_directory_path() / "xmcaug_accept8";
  fs::remove_all(root);
  fs::create_directories(root);

  testsupport::SyntheticSpec spec;
  spec.n_train = 300;
  spec.n_test = 80;
  spec.n_labels = 60;
  spec.n_clusters = 12;
  spec.seed = 99;
  auto data = testsupport::make_synthetic(spec);

  io::write_label_matrix(data.train.y, root / "trn_X_Y.txt");
  io::write_text_corpus(data.train.instances, root / "trn.raw.txt");
  io::write_text_corpus(data.train.label_features, root / "lbl.raw.txt");
  io::write_label_matrix(data.test.y, root / "tst_X_Y.txt");
  io::write_text_corpus(data.test.instances, root / "tst.raw.txt");

  // Round trip: a second write of what was just read must be byte-identical.
  auto first = slurp(root / "trn_X_Y.txt");
  auto reread = io::read_label_matrix(root / "trn_X_Y.txt");
  io::write_label_matrix(reread, root / "trn_X_Y.rt.txt");
  if (slurp(root / "trn_X_Y.rt.txt") != first) {
    detail = "label-matrix round trip not byte-identical";
    return false;
  }

  pipeline::PipelineConfig cfg;
  cfg.data.y = root / "trn_X_Y.txt";
  cfg.data.instances = root / "trn.raw.txt";
  cfg.data.label_features = root / "lbl.raw.txt";
  cfg.data.test_y = root / "tst_X_Y.txt";
  cfg.data.test_instances = root / "tst.raw.txt";
  cfg.data.name = "accept8";
  cfg.train.epochs = 5;
  cfg.features.hash_dim = 1u << 12;
  cfg.output_dir = (root / "outA").string();
  {
    std::ofstream out(root / "config.json", std::ios::binary);
    out << cfg.to_json();
  }
  const std::string cfg_arg = " -c " + (root / "config.json").string();

  if (run_cli(cli, "run-all" + cfg_arg + " -o " + (root / "outA").string()) != 0 ||
      run_cli(cli, "run-all" + cfg_arg + " -o " + (root / "outB").string()) != 0) {
    detail = "CLI run-all failed";
    return false;
  }
  std::string why;
  if (!dirs_identical(root / "outA", root / "outB", why)) {
    detail = "rerun not byte-identical: " + why;
    return false;
  }

  // Worker-count invariance: re-predict with 4 workers over outB's model.
  auto before = slurp(root / "outB" / "predictions.txt");
  if (run_cli(cli, "predict" + cfg_arg + " -o " + (root / "outB").string() +
                       " --workers 4") != 0) {
    detail = "CLI predict --workers 4 failed";
    return false;
  }
  if (slurp(root / "outB" / "predictions.txt") != before) {
    detail = "worker count changed prediction bytes";
    return false;
  }

  fs::remove_all(root);
  detail = "run-all rerun, round trip, and 4-worker predict all byte-identical";
  return true;
}

// ---------------------------------------------------------------------------
// 9. Optional full-scale validation (needs the real dataset on disk).

bool criterion_full_scale(std::string& detail, bool& skipped) {
  const char* dir = std::getenv("XMCAUG_LF_AMAZONTITLES_DIR");
  if (!dir) {
    skipped = true;
    detail = "set XMCAUG_LF_AMAZONTITLES_DIR to the dataset folder to enable";
    return true;
  }
  fs::path base(dir);
  pipeline::PipelineConfig cfg;
  cfg.data.y = base / "trn_X_Y.txt";
  cfg.data.instances = base / "trn.raw.txt";
  cfg.data.label_features = base / "lbl.raw.txt";
  auto rep = pipeline::cmd_validate(cfg);
  std::ostringstream os;
  os << "N=" << rep.n_rows << " L=" << rep.n_labels
     << " APpL=" << fmt(rep.avg_points_per_label)
     << " ALpP=" << fmt(rep.avg_labels_per_point);
  detail = os.str();
  return rep.n_rows == 294805 && rep.n_labels == 131073 &&
         std::abs(rep.avg_points_per_label - 5.15) <= 0.01 &&
         std::abs(rep.avg_labels_per_point - 2.29) <= 0.01;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance_tests <path-to-cli>\n";
    return 2;
  }
  const std::string cli = argv[1];
  int failures = 0;
  std::string detail;

  bool ok = criterion_cooccurrence(detail);
  report(1, ok, "co-occurrence counts equal the dense oracle", detail);
  failures += !ok;

  ok = criterion_gandalf_targets(detail);
  report(2, ok, "soft-target rows match the per-pair oracle and shrink with the threshold", detail);
  failures += !ok;

  ok = criterion_metric_oracles(detail);
  report(3, ok, "P@k / PSP@k / C@k / bin decomposition match brute force", detail);
  failures += !ok;

  ok = criterion_gradient(detail);
  report(4, ok, "batch gradient matches central finite differences", detail);
  failures += !ok;

  auto t0 = Clock::now();
  std::vector<SeedOutcome> runs;
  for (std::uint64_t seed = 1; seed <= 10; ++seed)
    runs.push_back(run_synthetic_seed(seed));
  double elapsed = seconds_since(t0);

  ok = criterion_gandalf_effect(runs, elapsed, detail);
  report(5, ok, "augmentation improves tail metrics on the synthetic benchmark", detail);
  failures += !ok;

  ok = criterion_subsampling_trend(runs, detail);
  report(6, ok, "PSP@5 grows with the augmented label fraction; tail-binned beats random", detail);
  failures += !ok;

  ok = criterion_coverage(runs, detail);
  report(7, ok, "augmentation improves label coverage C@5", detail);
  failures += !ok;

  ok = criterion_determinism(cli, detail);
  report(8, ok, "pipeline outputs are byte-deterministic and worker-invariant", detail);
  failures += !ok;

  bool skipped = false;
  ok = criterion_full_scale(detail, skipped);
  if (skipped)
    report_skip(9, "full-scale dataset statistics", detail);
  else {
    report(9, ok, "full-scale dataset statistics", detail);
    failures += !ok;
  }

  return failures == 0 ? 0 : 1;
}
