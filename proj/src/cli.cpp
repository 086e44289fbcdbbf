#include "jscc/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <map>
#include <tuple>

#include "jscc/checkpoint.hpp"
#include "jscc/codec.hpp"
#include "jscc/config.hpp"
#include "jscc/data.hpp"
#include "jscc/evaluation.hpp"
#include "jscc/training.hpp"

namespace jscc {
namespace cli {

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir_override;
  int64_t seed_override = -1;
  bool no_timestamp = false;
  int workers = 1;
  std::vector<std::string> checkpoints;
};

void add_common(CLI::App* cmd, CommonOpts* opts, bool with_checkpoints,
                int min_checkpoints = 1) {
  cmd->add_option("--config", opts->config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opts->out_dir_override, "override the output directory");
  cmd->add_option("--seed", opts->seed_override, "override training and evaluation seeds");
  cmd->add_flag("--no-timestamp", opts->no_timestamp, "omit the generated-at CSV header line");
  cmd->add_option("--workers", opts->workers, "worker threads for evaluation")
      ->check(CLI::PositiveNumber);
  if (with_checkpoints) {
    cmd->add_option("checkpoints", opts->checkpoints, "checkpoint file(s)")
        ->required()
        ->expected(min_checkpoints, -1)
        ->check(CLI::ExistingFile);
  }
}

config::ExperimentConfig load_and_override(const CommonOpts& opts) {
  config::ExperimentConfig cfg = config::load_config(opts.config_path);
  if (!opts.out_dir_override.empty()) cfg.out_dir = opts.out_dir_override;
  if (opts.seed_override >= 0) {
    cfg.train_seed = static_cast<uint64_t>(opts.seed_override);
    cfg.eval_seed = static_cast<uint64_t>(opts.seed_override);
  }
  if (cfg.out_dir.empty()) {
    throw config::ConfigError(opts.config_path, 0, "no output directory configured");
  }
  std::filesystem::create_directories(cfg.out_dir);
  return cfg;
}

codec::ArchSpec build_arch(const config::ExperimentConfig& cfg) {
  codec::ArchSpec probe = codec::make_preset(cfg.arch_preset, 16);
  const int stride = probe.encoder_stride_product();
  const int c = codec::channels_for_ratio(cfg.bandwidth_ratio, 32, 32, probe.input_channels,
                                          stride);
  codec::ArchSpec arch = codec::make_preset(cfg.arch_preset, c);
  arch.use_attention = cfg.use_attention;
  if (cfg.af_hidden_width >= 0) arch.af_hidden_width = cfg.af_hidden_width;
  arch.validate();
  return arch;
}

data::Dataset load_split(const config::ExperimentConfig& cfg, bool test_split) {
  const auto& paths = test_split ? cfg.test_paths : cfg.paths;
  const int64_t limit = test_split ? cfg.test_limit : cfg.limit;
  if (paths.empty()) {
    throw config::ConfigError(test_split ? "test_paths" : "paths", 0,
                              "no dataset paths configured for this command");
  }
  data::Dataset ds;
  if (cfg.data_kind == "cifar10") {
    ds = data::load_cifar10_binary(paths, limit);
  } else {
    codec::ArchSpec probe = codec::make_preset(cfg.arch_preset, 16);
    ds = data::load_image_dir(paths.front(), cfg.crop, probe.encoder_stride_product(),
                              test_split ? cfg.eval_seed : cfg.train_seed, limit);
  }
  ds.split = test_split ? "test" : "train";
  if (ds.empty()) {
    throw config::ConfigError(paths.front(), 0, "dataset is empty");
  }
  return ds;
}

evaluation::EvalConfig make_eval_config(const config::ExperimentConfig& cfg, int workers) {
  evaluation::EvalConfig ec;
  ec.snr_test_list = cfg.snr_list;
  ec.repeats = cfg.repeats;
  ec.seed = cfg.eval_seed;
  ec.max_pixel = cfg.max_pixel;
  ec.psnr_cap_db = cfg.psnr_cap;
  ec.workers = workers;
  return ec;
}

struct LoadedCheckpoint {
  checkpoint::LoadedModel<float> loaded;
  std::string id;
  std::string path;
};

std::vector<LoadedCheckpoint> load_checkpoints(const std::vector<std::string>& paths) {
  std::vector<LoadedCheckpoint> out;
  std::map<std::string, int> seen;
  for (const auto& p : paths) {
    LoadedCheckpoint lc;
    lc.loaded = checkpoint::load_checkpoint<float>(p);
    lc.path = p;
    std::string id = checkpoint::model_id(lc.loaded.model.arch, lc.loaded.meta.snr_dist);
    const int n = ++seen[id];
    if (n > 1) id += "#" + std::to_string(n);
    lc.id = id;
    out.push_back(std::move(lc));
  }
  return out;
}

int cmd_train(const CommonOpts& opts, std::ostream& out) {
  config::ExperimentConfig cfg = load_and_override(opts);
  codec::ArchSpec arch = build_arch(cfg);
  codec::Model<float> model = codec::build_model<float>(arch);
  codec::init_params(model, cfg.train_seed);

  data::Dataset train_ds = load_split(cfg, /*test_split=*/false);

  training::TrainConfig tc;
  tc.snr_dist = cfg.snr_dist;
  tc.learning_rate = cfg.lr;
  tc.batch_size = cfg.batch;
  tc.epochs = cfg.epochs;
  tc.seed = cfg.train_seed;
  tc.bandwidth_ratio = cfg.bandwidth_ratio;
  tc.arch_preset = cfg.arch_preset;
  tc.snr_per_batch = cfg.snr_per_batch;
  tc.checkpoint_every_epochs = cfg.checkpoint_every_epochs;
  tc.checkpoint_every_batches = cfg.checkpoint_every_batches;
  tc.out_dir = cfg.out_dir;
  tc.workers = opts.workers;

  training::TrainResult result = training::train(model, train_ds, tc);
  out << "trained " << checkpoint::model_id(arch, tc.snr_dist.str()) << " for " << cfg.epochs
      << " epochs on " << train_ds.size() << " images\n";
  out << "final loss " << result.log.entries.back().loss << "\n";
  out << "checkpoint: " << result.final_checkpoint << "\n";
  out << "log: " << cfg.out_dir + "/train_log.csv" << "\n";
  return 0;
}

int cmd_sweep(const CommonOpts& opts, std::ostream& out) {
  config::ExperimentConfig cfg = load_and_override(opts);
  if (cfg.snr_list.empty()) {
    throw config::ConfigError(opts.config_path, 0, "eval snr_list is empty");
  }
  data::Dataset test_ds = load_split(cfg, /*test_split=*/true);
  evaluation::EvalConfig ec = make_eval_config(cfg, opts.workers);

  evaluation::SweepResult rows;
  for (const auto& lc : load_checkpoints(opts.checkpoints)) {
    evaluation::SweepResult part = evaluation::sweep(lc.loaded.model, lc.id, test_ds, ec);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const std::string path = cfg.out_dir + "/sweep.csv";
  evaluation::write_sweep_csv(path, rows, !opts.no_timestamp);
  out << "wrote " << path << " (" << rows.size() << " rows)\n";
  return 0;
}

int cmd_mismatch(const CommonOpts& opts, std::ostream& out) {
  config::ExperimentConfig cfg = load_and_override(opts);
  if (cfg.mismatch_fb.empty() || cfg.mismatch_true.empty()) {
    throw config::ConfigError(opts.config_path, 0, "mismatch grid is empty");
  }
  data::Dataset test_ds = load_split(cfg, /*test_split=*/true);
  evaluation::EvalConfig ec = make_eval_config(cfg, opts.workers);

  auto checkpoints = load_checkpoints(opts.checkpoints);
  std::vector<std::tuple<std::string, double, double, evaluation::MeanStd>> rows;
  for (const auto& lc : checkpoints) {
    for (double fb : cfg.mismatch_fb) {
      for (double tr : cfg.mismatch_true) {
        rows.emplace_back(lc.id, fb, tr,
                          evaluation::mismatch_eval(lc.loaded.model, test_ds, fb, tr, ec));
      }
    }
  }
  const std::string path = cfg.out_dir + "/mismatch.csv";
  evaluation::write_mismatch_csv(path, rows, !opts.no_timestamp);
  out << "wrote " << path << " (" << rows.size() << " rows)\n";
  return 0;
}

int cmd_attention(const CommonOpts& opts, std::ostream& out) {
  config::ExperimentConfig cfg = load_and_override(opts);
  if (cfg.snr_list.empty()) {
    throw config::ConfigError(opts.config_path, 0, "eval snr_list is empty");
  }
  data::Dataset test_ds = load_split(cfg, /*test_split=*/true);
  evaluation::EvalConfig ec = make_eval_config(cfg, opts.workers);

  auto checkpoints = load_checkpoints(opts.checkpoints);
  std::vector<evaluation::AttentionStats> stats;
  for (double snr : cfg.snr_list) {
    stats.push_back(evaluation::attention_stats(checkpoints.front().loaded.model, test_ds, snr,
                                                ec, cfg.attention_side == "decoder"));
  }
  const std::string path = cfg.out_dir + "/attention.csv";
  evaluation::write_attention_csv(path, stats, !opts.no_timestamp);
  out << "wrote " << path << "\n";
  return 0;
}

int cmd_report(const CommonOpts& opts, std::ostream& out) {
  config::ExperimentConfig cfg = load_and_override(opts);
  data::Dataset test_ds = load_split(cfg, /*test_split=*/true);
  evaluation::EvalConfig ec = make_eval_config(cfg, opts.workers);

  auto checkpoints = load_checkpoints(opts.checkpoints);

  std::vector<std::pair<std::string, int64_t>> strategies;
  std::vector<evaluation::EnsembleMember> baseline_members;
  int64_t baseline_param_sum = 0;
  for (const auto& lc : checkpoints) {
    strategies.emplace_back(lc.id, lc.loaded.model.parameter_count());
    if (!lc.loaded.model.arch.use_attention) {
      training::SnrDist dist = training::SnrDist::parse(lc.loaded.meta.snr_dist);
      if (dist.kind == training::SnrDist::Kind::fixed) {
        baseline_members.push_back({dist.value, &lc.loaded.model});
        baseline_param_sum += lc.loaded.model.parameter_count();
      }
    }
  }
  std::string ensemble_id;
  if (baseline_members.size() >= 2) {
    ensemble_id = "bdjscc-" + std::to_string(baseline_members.size());
    strategies.emplace_back(ensemble_id, baseline_param_sum);
  }
  auto storage = evaluation::storage_report(strategies);
  const std::string storage_path = cfg.out_dir + "/storage.csv";
  evaluation::write_storage_csv(storage_path, storage, !opts.no_timestamp);

  out << "strategy,param_count,storage_mb\n";
  for (const auto& row : storage) {
    out << row.strategy << "," << row.param_count << "," << row.mb_human << " MB\n";
  }

  if (!cfg.snr_list.empty()) {
    evaluation::SweepResult rows;
    for (const auto& lc : checkpoints) {
      if (lc.loaded.model.arch.use_attention) {
        auto part = evaluation::sweep(lc.loaded.model, lc.id, test_ds, ec);
        rows.insert(rows.end(), part.begin(), part.end());
      }
    }
    if (!baseline_members.empty()) {
      auto part = evaluation::ensemble_eval(
          baseline_members, ensemble_id.empty() ? "bdjscc-1" : ensemble_id, test_ds, ec);
      rows.insert(rows.end(), part.begin(), part.end());
    }
    const std::string ensemble_path = cfg.out_dir + "/ensemble.csv";
    evaluation::write_sweep_csv(ensemble_path, rows, !opts.no_timestamp);
    out << "wrote " << ensemble_path << " (" << rows.size() << " rows)\n";
  }
  out << "wrote " << storage_path << "\n";
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SNR-adaptive joint source-channel coding for images"};
  app.require_subcommand(1);

  CommonOpts train_o, sweep_o, mismatch_o, attention_o, report_o;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model from a config");
  add_common(train_cmd, &train_o, /*with_checkpoints=*/false);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "PSNR-vs-SNR sweep of checkpoints");
  add_common(sweep_cmd, &sweep_o, true, 1);
  CLI::App* mismatch_cmd =
      app.add_subcommand("mismatch", "feedback/true SNR mismatch grid for a checkpoint");
  add_common(mismatch_cmd, &mismatch_o, true, 1);
  CLI::App* attention_cmd =
      app.add_subcommand("attention", "scaling factor statistics for a checkpoint");
  add_common(attention_cmd, &attention_o, true, 1);
  CLI::App* report_cmd =
      app.add_subcommand("report", "storage and ensemble-strategy report");
  add_common(report_cmd, &report_o, true, 1);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << e.what() << "\n";
    return 2;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_o, out);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_o, out);
    if (mismatch_cmd->parsed()) return cmd_mismatch(mismatch_o, out);
    if (attention_cmd->parsed()) return cmd_attention(attention_o, out);
    if (report_cmd->parsed()) return cmd_report(report_o, out);
  } catch (const config::ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  err << "no subcommand given\n";
  return 2;
}

}  // namespace cli
}  // namespace jscc
