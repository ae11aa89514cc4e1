#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "xmcaug/errors.hpp"
#include "xmcaug/pipeline.hpp"

namespace {

using xmcaug::pipeline::PipelineConfig;

struct Overrides {
  std::string config_path;
  std::string output_dir;
  std::string mode;
  std::string target_kind;
  double delta = -1.0;
  double label_fraction = -1.0;
  std::string sampling_scheme;
  std::int64_t seed = -1;
  std::int64_t workers = -1;
};

void add_common_options(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("-c,--config", ov.config_path, "pipeline config (JSON)")
      ->required();
  cmd->add_option("-o,--output-dir", ov.output_dir,
                  "override config output_dir");
  cmd->add_option("--mode", ov.mode,
                  "override training data mode "
                  "(original|z_only|combined|combined_subsample)");
  cmd->add_option("--target-kind", ov.target_kind,
                  "override augment target kind "
                  "(gandalf|self_annotation|glas)");
  cmd->add_option("--delta", ov.delta, "override soft-target threshold");
  cmd->add_option("--label-fraction", ov.label_fraction,
                  "override augmented label fraction");
  cmd->add_option("--sampling-scheme", ov.sampling_scheme,
                  "override label sampling (all|random|tail_binned)");
  cmd->add_option("--seed", ov.seed, "override train + augment seeds");
  cmd->add_option("--workers", ov.workers,
                  "worker threads (also XMCAUG_WORKERS); never changes "
                  "output bytes");
}

PipelineConfig make_config(const Overrides& ov) {
  auto cfg = PipelineConfig::from_json_file(ov.config_path);
  if (const char* env = std::getenv("XMCAUG_WORKERS"))
    cfg.workers = static_cast<std::size_t>(std::strtoul(env, nullptr, 10));
  // Flags win over both config file and environment.
  if (!ov.output_dir.empty()) cfg.output_dir = ov.output_dir;
  if (!ov.mode.empty())
    cfg.mode = xmcaug::pipeline::train_mode_from_string(ov.mode);
  if (!ov.target_kind.empty())
    cfg.aug.target_kind = xmcaug::augment::target_kind_from_string(ov.target_kind);
  if (ov.delta >= 0.0) cfg.aug.delta = ov.delta;
  if (ov.label_fraction >= 0.0) cfg.aug.label_fraction = ov.label_fraction;
  if (!ov.sampling_scheme.empty())
    cfg.aug.sampling_scheme =
        xmcaug::augment::sampling_scheme_from_string(ov.sampling_scheme);
  if (ov.seed >= 0) {
    cfg.aug.seed = static_cast<std::uint64_t>(ov.seed);
    cfg.train.seed = static_cast<std::uint64_t>(ov.seed);
    cfg.subsample_seed = static_cast<std::uint64_t>(ov.seed);
  }
  if (ov.workers >= 0) cfg.workers = static_cast<std::size_t>(ov.workers);
  if (cfg.workers == 0) cfg.workers = 1;
  cfg.aug.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"XMC label-feature augmentation pipeline"};
  app.require_subcommand(1);

  Overrides ov;
  std::string neighbor_query;
  std::size_t neighbor_k = 5;
  bool neighbor_json = false;

  auto* validate = app.add_subcommand("validate", "parse and check a dataset");
  auto* graph_cmd = app.add_subcommand("graph", "build and dump the label graph");
  auto* augment = app.add_subcommand("augment", "write the augmented dataset");
  auto* train = app.add_subcommand("train", "train the linear OvA model");
  auto* predict = app.add_subcommand("predict", "score the test split");
  auto* eval = app.add_subcommand("eval", "compute P@k / PSP@k / C@k reports");
  auto* neighbors =
      app.add_subcommand("neighbors", "list co-occurrence neighbors of a label");
  auto* run_all = app.add_subcommand("run-all", "full pipeline end to end");

  for (auto* cmd : {validate, graph_cmd, augment, train, predict, eval,
                    neighbors, run_all})
    add_common_options(cmd, ov);
  neighbors->add_option("-l,--label", neighbor_query,
                        "label text or decimal index")->required();
  neighbors->add_option("-k", neighbor_k, "neighbor count");
  neighbors->add_flag("--json", neighbor_json, "emit JSON instead of text");

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = make_config(ov);
    if (validate->parsed()) {
      std::cout << xmcaug::pipeline::cmd_validate(cfg).to_text();
    } else if (graph_cmd->parsed()) {
      xmcaug::pipeline::cmd_graph(cfg);
    } else if (augment->parsed()) {
      xmcaug::pipeline::cmd_augment(cfg);
    } else if (train->parsed()) {
      xmcaug::pipeline::cmd_train(cfg);
    } else if (predict->parsed()) {
      xmcaug::pipeline::cmd_predict(cfg);
    } else if (eval->parsed()) {
      std::cout << xmcaug::pipeline::cmd_eval(cfg).to_csv();
    } else if (neighbors->parsed()) {
      auto ds = xmcaug::pipeline::load_train_dataset(cfg);
      auto listing =
          xmcaug::pipeline::cmd_neighbors(cfg, neighbor_query, neighbor_k);
      std::cout << (neighbor_json ? listing.to_json(ds.label_features)
                                  : listing.to_text(ds.label_features));
    } else if (run_all->parsed()) {
      std::cout << xmcaug::pipeline::run_all(cfg).to_csv();
    }
  } catch (const xmcaug::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
