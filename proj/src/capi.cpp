#include "hdmann.h"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "core/analysis.hpp"
#include "core/common.hpp"
#include "core/config.hpp"
#include "core/controller.hpp"
#include "core/dataset.hpp"
#include "core/report.hpp"

using namespace hdmann;

struct hdm_config {
  RunConfig config;
};

struct hdm_dataset {
  GlyphDataset dataset;
};

struct hdm_checkpoint {
  ControllerParams params;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <typename F>
hdm_status wrap(F&& fn) noexcept {
  try {
    fn();
    return HDM_OK;
  } catch (const ValidationError& e) {
    set_error(e.what());
    return HDM_ERR_VALIDATION;
  } catch (const DomainError& e) {
    set_error(e.what());
    return HDM_ERR_DOMAIN;
  } catch (const IoError& e) {
    set_error(e.what());
    return HDM_ERR_IO;
  } catch (const std::exception& e) {
    set_error(e.what());
    return HDM_ERR_RUNTIME;
  } catch (...) {
    set_error("unknown failure");
    return HDM_ERR_RUNTIME;
  }
}

hdm_status invalid(const char* what) {
  set_error(std::string("invalid argument: ") + what);
  return HDM_ERR_INVALID_ARG;
}

void apply_threads(const RunConfig& config) { set_compute_threads(config.get_int("threads")); }

}  // namespace

extern "C" {

const char* hdm_version(void) { return "0.1.0"; }

const char* hdm_status_name(hdm_status status) {
  switch (status) {
    case HDM_OK: return "ok";
    case HDM_ERR_INVALID_ARG: return "invalid-argument";
    case HDM_ERR_VALIDATION: return "validation";
    case HDM_ERR_DOMAIN: return "domain";
    case HDM_ERR_IO: return "io";
    case HDM_ERR_RUNTIME: return "runtime";
  }
  return "?";
}

const char* hdm_last_error(void) { return g_last_error.c_str(); }

hdm_config* hdm_config_new(void) { return new hdm_config(); }

void hdm_config_free(hdm_config* config) { delete config; }

hdm_status hdm_config_set(hdm_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return invalid("hdm_config_set");
  return wrap([&] { config->config.set(key, value); });
}

hdm_status hdm_config_load_file(hdm_config* config, const char* path) {
  if (!config || !path) return invalid("hdm_config_load_file");
  return wrap([&] { config->config.load_file(path); });
}

hdm_status hdm_config_get(const hdm_config* config, const char* key, char* buf, size_t buf_len) {
  if (!config || !key || !buf || buf_len == 0) return invalid("hdm_config_get");
  return wrap([&] {
    std::string v = config->config.get(key);
    std::snprintf(buf, buf_len, "%s", v.c_str());
  });
}

hdm_status hdm_dataset_generate(const hdm_config* config, hdm_dataset** out) {
  if (!config || !out) return invalid("hdm_dataset_generate");
  return wrap([&] {
    auto ds = std::make_unique<hdm_dataset>();
    ds->dataset = generate_glyphs(config->config.get_int("classes"),
                                  config->config.get_int("samples"), config->config.seed(),
                                  config->config.get_int("image_size"));
    *out = ds.release();
  });
}

hdm_status hdm_dataset_load(const char* dir, hdm_dataset** out) {
  if (!dir || !out) return invalid("hdm_dataset_load");
  return wrap([&] {
    auto ds = std::make_unique<hdm_dataset>();
    ds->dataset = load_image_directory(dir);
    *out = ds.release();
  });
}

hdm_status hdm_dataset_export(const hdm_dataset* dataset, const char* dir) {
  if (!dataset || !dir) return invalid("hdm_dataset_export");
  return wrap([&] { export_image_directory(dataset->dataset, dir); });
}

void hdm_dataset_free(hdm_dataset* dataset) { delete dataset; }

hdm_status hdm_dataset_info(const hdm_dataset* dataset, int* classes, int* samples_per_class,
                            int* image_size) {
  if (!dataset) return invalid("hdm_dataset_info");
  return wrap([&] {
    if (classes) *classes = static_cast<int>(dataset->dataset.classes.size());
    if (samples_per_class) *samples_per_class = dataset->dataset.samples_per_class();
    if (image_size) *image_size = dataset->dataset.image_size;
  });
}

hdm_status hdm_train(const hdm_config* config, const hdm_dataset* dataset,
                     const char* checkpoint_path, const char* log_csv_path,
                     double* best_val_accuracy) {
  if (!config || !dataset || !checkpoint_path) return invalid("hdm_train");
  return wrap([&] {
    apply_threads(config->config);
    TrainingConfig tc = config->config.training();
    // The dataset, not the config, fixes the controller's input size.
    tc.arch = Architecture::from_string(config->config.get("arch"), config->config.dim(),
                                        dataset->dataset.image_size);
    TrainResult result = run_training(tc, dataset->dataset);
    result.best.save_file(checkpoint_path);
    if (log_csv_path) {
      std::ofstream os(log_csv_path, std::ios::binary);
      if (!os) throw IoError(std::string("cannot write log: ") + log_csv_path);
      write_training_log_csv(result.log, os);
    }
    if (best_val_accuracy) *best_val_accuracy = result.best_val_acc;
  });
}

hdm_status hdm_checkpoint_load(const char* path, hdm_checkpoint** out) {
  if (!path || !out) return invalid("hdm_checkpoint_load");
  return wrap([&] {
    auto cp = std::make_unique<hdm_checkpoint>();
    cp->params = ControllerParams::load_file(path);
    *out = cp.release();
  });
}

void hdm_checkpoint_free(hdm_checkpoint* checkpoint) { delete checkpoint; }

hdm_status hdm_checkpoint_info(const hdm_checkpoint* checkpoint, int* embedding_dim,
                               int* input_size, long long* param_count) {
  if (!checkpoint) return invalid("hdm_checkpoint_info");
  return wrap([&] {
    if (embedding_dim) *embedding_dim = checkpoint->params.arch.embedding_dim;
    if (input_size) *input_size = checkpoint->params.arch.input_size;
    if (param_count) *param_count = checkpoint->params.param_count();
  });
}

hdm_status hdm_eval(const hdm_config* config, const hdm_checkpoint* checkpoint,
                    const hdm_dataset* dataset, const char* report_json_path,
                    double* mean_accuracy, double* std_accuracy) {
  if (!config || !checkpoint || !dataset) return invalid("hdm_eval");
  return wrap([&] {
    apply_threads(config->config);
    EvalReport report = run_eval(checkpoint->params, dataset->dataset, config->config);
    if (report_json_path) write_eval_json(report, config->config, report_json_path);
    if (mean_accuracy) *mean_accuracy = report.mean_accuracy;
    if (std_accuracy) *std_accuracy = report.std_accuracy;
  });
}

hdm_status hdm_sweep_sigma_lambda(const hdm_config* config, const char* csv_path,
                                  const char* json_path) {
  if (!config) return invalid("hdm_sweep_sigma_lambda");
  return wrap([&] {
    auto grid = run_sigma_grid(config->config);
    if (csv_path) write_sigma_grid_csv(grid, csv_path);
    if (json_path) write_sigma_grid_json(grid, config->config, json_path);
  });
}

hdm_status hdm_sweep_noise(const hdm_config* config, const hdm_checkpoint* checkpoint,
                           const hdm_dataset* dataset, const char* csv_path,
                           const char* json_path) {
  if (!config || !checkpoint || !dataset) return invalid("hdm_sweep_noise");
  return wrap([&] {
    apply_threads(config->config);
    auto points = noise_sweep(checkpoint->params, dataset->dataset, Split::kTest,
                              config->config.noise_sweep_config());
    if (csv_path) write_noise_sweep_csv(points, csv_path);
    if (json_path) write_noise_sweep_json(points, config->config, json_path);
  });
}

hdm_status hdm_sweep_dimension(const hdm_config* config, const hdm_dataset* dataset,
                               const char* csv_path, const char* json_path) {
  if (!config || !dataset) return invalid("hdm_sweep_dimension");
  return wrap([&] {
    apply_threads(config->config);
    auto points = dimension_sweep(dataset->dataset, config->config.dimension_sweep_config());
    if (csv_path) write_dimension_sweep_csv(points, csv_path);
    if (json_path) write_dimension_sweep_json(points, config->config, json_path);
  });
}

hdm_status hdm_report_render(const char* const* json_paths, size_t count, const char* out_path) {
  if (!json_paths || count == 0) return invalid("hdm_report_render");
  return wrap([&] {
    std::vector<std::string> paths;
    for (size_t i = 0; i < count; ++i) {
      if (!json_paths[i]) throw ValidationError("null report path");
      paths.emplace_back(json_paths[i]);
    }
    std::string text = render_reports(paths, out_path ? out_path : "");
    if (!out_path) std::fputs(text.c_str(), stdout);
  });
}

double hdm_softabs(double alpha, double beta) { return softabs(alpha, beta); }

hdm_status hdm_sigma_lambda_theory(double alpha, int d, double sigma_rel, double* out) {
  if (!out) return invalid("hdm_sigma_lambda_theory");
  return wrap([&] { *out = sigma_lambda_theory(alpha, d, sigma_rel); });
}

hdm_status hdm_cosine_similarity(const double* a, const double* b, size_t d, double* out) {
  if (!a || !b || !out || d == 0) return invalid("hdm_cosine_similarity");
  return wrap([&] {
    *out = cosine_similarity(std::span<const double>(a, d), std::span<const double>(b, d));
  });
}

}  // extern "C"
