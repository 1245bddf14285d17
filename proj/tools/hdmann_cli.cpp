// hdmann command-line front end. Everything goes through the C API in
// hdmann.h; this translation unit deliberately does not touch the core
// headers.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hdmann.h"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitRuntime = 4;

int exit_code_for(hdm_status status) {
  switch (status) {
    case HDM_OK: return 0;
    case HDM_ERR_INVALID_ARG:
    case HDM_ERR_VALIDATION: return kExitValidation;
    default: return kExitRuntime;
  }
}

[[noreturn]] void fail(hdm_status status) {
  std::cerr << "error (" << hdm_status_name(status) << "): " << hdm_last_error() << "\n";
  std::exit(exit_code_for(status));
}

void check(hdm_status status) {
  if (status != HDM_OK) fail(status);
}

struct ConfigHandle {
  hdm_config* ptr = hdm_config_new();
  ~ConfigHandle() { hdm_config_free(ptr); }
};

struct DatasetHandle {
  hdm_dataset* ptr = nullptr;
  ~DatasetHandle() { hdm_dataset_free(ptr); }
};

struct CheckpointHandle {
  hdm_checkpoint* ptr = nullptr;
  ~CheckpointHandle() { hdm_checkpoint_free(ptr); }
};

std::string default_out_dir() {
  const char* env = std::getenv("HDMANN_OUT_DIR");
  return env && *env ? env : ".";
}

// Common pattern: explicit --config file first, then flag overrides, then
// raw --set key=value overrides (highest precedence).
struct CommonOpts {
  std::string config_file;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> flags;

  void add_flag_value(const std::string& key, const std::string& value) {
    flags.emplace_back(key, value);
  }

  void apply(hdm_config* config) const {
    if (!config_file.empty()) check(hdm_config_load_file(config, config_file.c_str()));
    for (const auto& [k, v] : flags) check(hdm_config_set(config, k.c_str(), v.c_str()));
    for (const auto& kv : sets) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::cerr << "error (validation): --set expects key=value, got '" << kv << "'\n";
        std::exit(kExitValidation);
      }
      check(hdm_config_set(config, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
    }
  }
};

void add_common(CLI::App* cmd, CommonOpts& common) {
  cmd->add_option("--config", common.config_file, "key = value config file");
  cmd->add_option("--set", common.sets, "raw config override key=value (repeatable)");
}

// Binds a CLI flag to a config key; the value is validated by the library.
void bind(CLI::App* cmd, CommonOpts& common, const std::string& flag, const std::string& key,
          const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&common, key](const std::string& v) { common.add_flag_value(key, v); }, help);
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hdmann: HD memory-augmented network simulator"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::string out_dir = default_out_dir();

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic glyph dataset");
  CommonOpts gen_common;
  add_common(gen, gen_common);
  bind(gen, gen_common, "--classes", "classes", "number of classes");
  bind(gen, gen_common, "--samples", "samples", "samples per class");
  bind(gen, gen_common, "--seed", "seed", "root seed");
  bind(gen, gen_common, "--image-size", "image_size", "square image size");
  gen->add_option("--out", out_dir, "output directory")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "episodic training; writes checkpoint + log");
  CommonOpts train_common;
  std::string train_dataset;
  add_common(train, train_common);
  train->add_option("--dataset", train_dataset, "dataset directory")->required();
  bind(train, train_common, "--problem", "problem", "WAYSxSHOTS, e.g. 5x1");
  bind(train, train_common, "--sharpening", "sharpening", "softabs|exp|abs|bypass");
  bind(train, train_common, "--beta", "beta", "softabs stiffness");
  bind(train, train_common, "--episodes", "episodes", "max training episodes");
  bind(train, train_common, "--val-interval", "val_interval", "episodes between checkpoints");
  bind(train, train_common, "--val-episodes", "val_episodes", "episodes per checkpoint");
  bind(train, train_common, "--batch", "batch", "query batch size");
  bind(train, train_common, "--lr", "lr", "Adam learning rate");
  bind(train, train_common, "--dim", "dim", "embedding dimensionality");
  bind(train, train_common, "--arch", "arch", "desk|full|conv:FxK,...,pool list");
  bind(train, train_common, "--regularizer", "regularizer", "on|off occupancy regularizers");
  bind(train, train_common, "--augment", "augment", "on|off augmentation");
  bind(train, train_common, "--seed", "seed", "root seed");
  bind(train, train_common, "--threads", "threads", "compute threads (1 = serial)");
  train->add_option("--out", out_dir, "output directory")->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "frozen-checkpoint accuracy over test episodes");
  CommonOpts eval_common;
  std::string eval_dataset, eval_checkpoint;
  add_common(eval, eval_common);
  eval->add_option("--dataset", eval_dataset, "dataset directory")->required();
  eval->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
  bind(eval, eval_common, "--problem", "problem", "WAYSxSHOTS");
  bind(eval, eval_common, "--mode", "mode", "real|bipolar|binary");
  bind(eval, eval_common, "--backend", "backend", "exact|pcm");
  bind(eval, eval_common, "--criterion", "criterion", "sum-argmax|global-argmax");
  bind(eval, eval_common, "--episodes", "eval_episodes", "test episodes");
  bind(eval, eval_common, "--batch", "batch", "queries per episode");
  bind(eval, eval_common, "--dim", "dim", "embedding dimensionality");
  bind(eval, eval_common, "--pcm-profile", "pcm_profile", "nominal|pessimistic|zero-noise");
  bind(eval, eval_common, "--sharpening", "infer_sharpening", "auto|softabs|exp|abs|bypass");
  bind(eval, eval_common, "--normalize", "infer_normalize", "auto|on|off");
  bind(eval, eval_common, "--seed", "seed", "root seed");
  bind(eval, eval_common, "--threads", "threads", "compute threads");
  eval->add_option("--out", out_dir, "output directory")->capture_default_str();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "parameter sweeps");
  sweep->require_subcommand(1);

  auto* sl = sweep->add_subcommand("sigma-lambda", "robustness-law grid");
  CommonOpts sl_common;
  add_common(sl, sl_common);
  bind(sl, sl_common, "--alphas", "alphas", "comma list of nominal similarities");
  bind(sl, sl_common, "--dims", "dims", "comma list of dimensionalities");
  bind(sl, sl_common, "--sigmas", "sigmas", "comma list of SET variabilities");
  bind(sl, sl_common, "--trials", "trials", "Monte-Carlo trials per cell");
  bind(sl, sl_common, "--seed", "seed", "root seed");
  sl->add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* noise = sweep->add_subcommand("noise", "accuracy vs conductance variation");
  CommonOpts noise_common;
  std::string noise_dataset, noise_checkpoint;
  add_common(noise, noise_common);
  noise->add_option("--dataset", noise_dataset, "dataset directory")->required();
  noise->add_option("--checkpoint", noise_checkpoint, "checkpoint file")->required();
  bind(noise, noise_common, "--levels", "levels", "comma list of variation levels");
  bind(noise, noise_common, "--layouts", "layouts", "comma list from bipolar,binary");
  bind(noise, noise_common, "--problem", "problem", "WAYSxSHOTS");
  bind(noise, noise_common, "--episodes", "eval_episodes", "episodes per level");
  bind(noise, noise_common, "--co-scale-read-noise", "co_scale_read_noise", "on|off");
  bind(noise, noise_common, "--pcm-profile", "pcm_profile", "base pcm profile");
  bind(noise, noise_common, "--seed", "seed", "root seed");
  bind(noise, noise_common, "--threads", "threads", "compute threads");
  noise->add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* dim = sweep->add_subcommand("dimension", "accuracy/robustness vs dimensionality");
  CommonOpts dim_common;
  std::string dim_dataset;
  add_common(dim, dim_common);
  dim->add_option("--dataset", dim_dataset, "dataset directory")->required();
  bind(dim, dim_common, "--dims", "dims", "comma list of dimensionalities");
  bind(dim, dim_common, "--train-episodes", "sweep_train_episodes", "short schedule length");
  bind(dim, dim_common, "--problem", "problem", "WAYSxSHOTS");
  bind(dim, dim_common, "--episodes", "eval_episodes", "eval episodes per dimension");
  bind(dim, dim_common, "--seed", "seed", "root seed");
  bind(dim, dim_common, "--threads", "threads", "compute threads");
  dim->add_option("--out", out_dir, "output directory")->capture_default_str();

  // report
  auto* report = app.add_subcommand("report", "summarize JSON reports");
  std::vector<std::string> report_inputs;
  std::string report_out;
  report->add_option("inputs", report_inputs, "report JSON files")->required();
  report->add_option("--out", report_out, "write summary here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);

  if (*gen) {
    ConfigHandle config;
    gen_common.apply(config.ptr);
    DatasetHandle ds;
    check(hdm_dataset_generate(config.ptr, &ds.ptr));
    check(hdm_dataset_export(ds.ptr, out_dir.c_str()));
    int classes = 0, samples = 0, size = 0;
    check(hdm_dataset_info(ds.ptr, &classes, &samples, &size));
    std::cout << "wrote " << classes << " classes x " << samples << " samples (" << size << "x"
              << size << ") to " << out_dir << "\n";
  } else if (*train) {
    ConfigHandle config;
    train_common.apply(config.ptr);
    DatasetHandle ds;
    check(hdm_dataset_load(train_dataset.c_str(), &ds.ptr));
    std::string ckpt = join_path(out_dir, "checkpoint.bin");
    std::string log = join_path(out_dir, "training_log.csv");
    double best = 0.0;
    check(hdm_train(config.ptr, ds.ptr, ckpt.c_str(), log.c_str(), &best));
    std::cout << "checkpoint: " << ckpt << "\nlog: " << log << "\nbest validation accuracy: "
              << best << "\n";
  } else if (*eval) {
    ConfigHandle config;
    eval_common.apply(config.ptr);
    DatasetHandle ds;
    check(hdm_dataset_load(eval_dataset.c_str(), &ds.ptr));
    CheckpointHandle ckpt;
    check(hdm_checkpoint_load(eval_checkpoint.c_str(), &ckpt.ptr));
    std::string report_path = join_path(out_dir, "eval_report.json");
    double mean = 0.0, stddev = 0.0;
    check(hdm_eval(config.ptr, ckpt.ptr, ds.ptr, report_path.c_str(), &mean, &stddev));
    std::cout << "report: " << report_path << "\nmean accuracy: " << mean << " (std " << stddev
              << ")\n";
  } else if (*sl) {
    ConfigHandle config;
    sl_common.apply(config.ptr);
    std::string csv = join_path(out_dir, "sigma_lambda.csv");
    std::string json = join_path(out_dir, "sigma_lambda.json");
    check(hdm_sweep_sigma_lambda(config.ptr, csv.c_str(), json.c_str()));
    std::cout << "wrote " << csv << " and " << json << "\n";
  } else if (*noise) {
    ConfigHandle config;
    noise_common.apply(config.ptr);
    DatasetHandle ds;
    check(hdm_dataset_load(noise_dataset.c_str(), &ds.ptr));
    CheckpointHandle ckpt;
    check(hdm_checkpoint_load(noise_checkpoint.c_str(), &ckpt.ptr));
    std::string csv = join_path(out_dir, "noise_sweep.csv");
    std::string json = join_path(out_dir, "noise_sweep.json");
    check(hdm_sweep_noise(config.ptr, ckpt.ptr, ds.ptr, csv.c_str(), json.c_str()));
    std::cout << "wrote " << csv << " and " << json << "\n";
  } else if (*dim) {
    ConfigHandle config;
    dim_common.apply(config.ptr);
    DatasetHandle ds;
    check(hdm_dataset_load(dim_dataset.c_str(), &ds.ptr));
    std::string csv = join_path(out_dir, "dimension_sweep.csv");
    std::string json = join_path(out_dir, "dimension_sweep.json");
    check(hdm_sweep_dimension(config.ptr, ds.ptr, csv.c_str(), json.c_str()));
    std::cout << "wrote " << csv << " and " << json << "\n";
  } else if (*report) {
    std::vector<const char*> paths;
    for (const auto& p : report_inputs) paths.push_back(p.c_str());
    check(hdm_report_render(paths.data(), paths.size(),
                            report_out.empty() ? nullptr : report_out.c_str()));
  }
  return 0;
}
