#include "core/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/common.hpp"

namespace hdmann {

using nlohmann::json;

EvalReport run_eval(const ControllerParams& params, const GlyphDataset& dataset,
                    const RunConfig& config) {
  InferOptions options = config.infer_options();
  auto [ways, shots] = config.problem();
  int batch = config.get_int("batch");
  int episodes = config.get_int("eval_episodes");
  if (params.arch.embedding_dim != config.dim())
    throw ValidationError("checkpoint dimensionality does not match config dim");

  AugmentSpec no_augment;
  no_augment.enabled = false;
  Rng episode_rng = Rng::stream(config.seed(), "eval-episodes");
  double sum = 0.0, sumsq = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    Episode episode =
        sample_episode(dataset, Split::kTest, ways, shots, batch, no_augment, episode_rng);
    Rng prog = Rng::stream(config.seed(), "pcm-program", static_cast<uint64_t>(ep));
    Rng read = Rng::stream(config.seed(), "pcm-read", static_cast<uint64_t>(ep));
    double acc = infer_episode(params, episode, options, &prog, &read);
    sum += acc;
    sumsq += acc * acc;
  }
  EvalReport r;
  r.episodes = episodes;
  r.mean_accuracy = sum / episodes;
  double var = episodes > 1 ? (sumsq - sum * sum / episodes) / (episodes - 1) : 0.0;
  r.std_accuracy = std::sqrt(std::max(0.0, var));
  return r;
}

std::vector<RobustnessPoint> run_sigma_grid(const RunConfig& config) {
  auto alphas = config.get_real_list("alphas");
  auto dims = config.get_int_list("dims");
  auto sigmas = config.get_real_list("sigmas");
  int trials = config.get_int("trials");
  std::vector<RobustnessPoint> grid;
  uint64_t cell = 0;
  for (double alpha : alphas) {
    for (int d : dims) {
      for (double sigma : sigmas) {
        Rng rng = Rng::stream(config.seed(), "sigma-lambda", cell++);
        grid.push_back(sigma_lambda_empirical(alpha, d, sigma, trials, rng));
      }
    }
  }
  return grid;
}

namespace {

json config_json(const RunConfig& config) {
  json j = json::object();
  for (const auto& [k, v] : config.items()) j[k] = v;
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write: " + path);
  os << text;
}

void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace

void write_eval_json(const EvalReport& report, const RunConfig& config, const std::string& path) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "eval";
  j["config"] = config_json(config);
  j["results"] = {{"mean_accuracy", report.mean_accuracy},
                  {"std_accuracy", report.std_accuracy},
                  {"episodes", report.episodes}};
  write_json_file(path, j);
}

void write_sigma_grid_csv(const std::vector<RobustnessPoint>& grid, const std::string& path) {
  std::ostringstream os;
  os << "alpha,d,sigma_rel,sigma_theory,sigma_empirical,mean_empirical,trials,rel_error\n";
  for (const auto& p : grid) {
    double rel = p.sigma_theory > 0.0 ? std::fabs(p.sigma_empirical - p.sigma_theory) / p.sigma_theory
                                      : 0.0;
    os << format_double(p.alpha) << ',' << p.d << ',' << format_double(p.sigma_rel) << ','
       << format_double(p.sigma_theory) << ',' << format_double(p.sigma_empirical) << ','
       << format_double(p.mean_empirical) << ',' << p.trials << ',' << format_double(rel) << '\n';
  }
  write_text_file(path, os.str());
}

void write_sigma_grid_json(const std::vector<RobustnessPoint>& grid, const RunConfig& config,
                           const std::string& path) {
  json rows = json::array();
  bool all_within = true;
  for (const auto& p : grid) {
    double rel = p.sigma_theory > 0.0 ? std::fabs(p.sigma_empirical - p.sigma_theory) / p.sigma_theory
                                      : 0.0;
    all_within = all_within && rel <= 0.10;
    rows.push_back({{"alpha", p.alpha},
                    {"d", p.d},
                    {"sigma_rel", p.sigma_rel},
                    {"sigma_theory", p.sigma_theory},
                    {"sigma_empirical", p.sigma_empirical},
                    {"mean_empirical", p.mean_empirical},
                    {"trials", p.trials},
                    {"rel_error", rel}});
  }
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "sweep-sigma-lambda";
  j["config"] = config_json(config);
  j["results"] = {{"grid", rows}, {"all_within_10pct", all_within}};
  write_json_file(path, j);
}

void write_noise_sweep_csv(const std::vector<NoiseSweepPoint>& points, const std::string& path) {
  std::ostringstream os;
  os << "level,layout,mean_accuracy,std_accuracy,episodes\n";
  for (const auto& p : points) {
    os << format_double(p.level) << ',' << to_string(p.layout) << ','
       << format_double(p.mean_accuracy) << ',' << format_double(p.std_accuracy) << ','
       << p.episodes << '\n';
  }
  write_text_file(path, os.str());
}

void write_noise_sweep_json(const std::vector<NoiseSweepPoint>& points, const RunConfig& config,
                            const std::string& path) {
  json rows = json::array();
  for (const auto& p : points) {
    rows.push_back({{"level", p.level},
                    {"layout", to_string(p.layout)},
                    {"mean_accuracy", p.mean_accuracy},
                    {"std_accuracy", p.std_accuracy},
                    {"episodes", p.episodes}});
  }
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "sweep-noise";
  j["config"] = config_json(config);
  j["results"] = {{"points", rows}};
  write_json_file(path, j);
}

void write_dimension_sweep_csv(const std::vector<DimensionSweepPoint>& points,
                               const std::string& path) {
  std::ostringstream os;
  os << "d,accuracy,sigma_theory,sigma_empirical,occupancy_std_random\n";
  for (const auto& p : points) {
    os << p.d << ',' << format_double(p.accuracy) << ',' << format_double(p.sigma_theory) << ','
       << format_double(p.sigma_empirical) << ',' << format_double(p.occupancy_std_random)
       << '\n';
  }
  write_text_file(path, os.str());
}

void write_dimension_sweep_json(const std::vector<DimensionSweepPoint>& points,
                                const RunConfig& config, const std::string& path) {
  json rows = json::array();
  std::vector<double> dims, sigmas;
  for (const auto& p : points) {
    rows.push_back({{"d", p.d},
                    {"accuracy", p.accuracy},
                    {"sigma_theory", p.sigma_theory},
                    {"sigma_empirical", p.sigma_empirical},
                    {"occupancy_std_random", p.occupancy_std_random}});
    dims.push_back(p.d);
    sigmas.push_back(p.sigma_empirical);
  }
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "sweep-dimension";
  j["config"] = config_json(config);
  j["results"] = {{"points", rows}};
  if (points.size() >= 2) {
    LogLogFit fit = loglog_fit(dims, sigmas);
    j["results"]["sigma_loglog_slope"] = fit.slope;
    j["results"]["sigma_loglog_r2"] = fit.r2;
  }
  write_json_file(path, j);
}

std::string render_reports(const std::vector<std::string>& json_paths,
                           const std::string& out_path) {
  std::ostringstream os;
  for (const auto& path : json_paths) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open report: " + path);
    json j;
    try {
      is >> j;
    } catch (const std::exception& e) {
      throw IoError("malformed report json in " + path + ": " + e.what());
    }
    if (!j.contains("schema_version") || !j.contains("kind") || !j.contains("results"))
      throw ValidationError("report missing schema_version/kind/results: " + path);
    int version = j["schema_version"].get<int>();
    if (version != kReportSchemaVersion)
      throw ValidationError("unsupported report schema version in " + path);
    std::string kind = j["kind"].get<std::string>();
    os << "== " << kind << " (" << path << ")\n";
    const json& res = j["results"];
    if (kind == "eval") {
      os << "  episodes:      " << res["episodes"].get<int>() << "\n";
      os << "  mean accuracy: " << res["mean_accuracy"].get<double>() << "\n";
      os << "  std accuracy:  " << res["std_accuracy"].get<double>() << "\n";
    } else if (kind == "sweep-noise") {
      for (const auto& p : res["points"]) {
        os << "  level " << p["level"].get<double>() << "  " << p["layout"].get<std::string>()
           << "  acc " << p["mean_accuracy"].get<double>() << " +- "
           << p["std_accuracy"].get<double>() << "\n";
      }
    } else if (kind == "sweep-sigma-lambda") {
      os << "  grid points: " << res["grid"].size() << "\n";
      os << "  all within 10%: " << (res["all_within_10pct"].get<bool>() ? "yes" : "no") << "\n";
      for (const auto& p : res["grid"]) {
        os << "  alpha " << p["alpha"].get<double>() << " d " << p["d"].get<int>() << " sigma "
           << p["sigma_rel"].get<double>() << ": theory " << p["sigma_theory"].get<double>()
           << " empirical " << p["sigma_empirical"].get<double>() << "\n";
      }
    } else if (kind == "sweep-dimension") {
      for (const auto& p : res["points"]) {
        os << "  d " << p["d"].get<int>() << "  acc " << p["accuracy"].get<double>()
           << "  sigma " << p["sigma_empirical"].get<double>() << "  occ-std "
           << p["occupancy_std_random"].get<double>() << "\n";
      }
      if (res.contains("sigma_loglog_slope"))
        os << "  sigma log-log slope: " << res["sigma_loglog_slope"].get<double>()
           << " (r2 " << res["sigma_loglog_r2"].get<double>() << ")\n";
    } else {
      os << "  (unrecognized report kind)\n";
    }
  }
  std::string text = os.str();
  if (!out_path.empty()) write_text_file(out_path, text);
  return text;
}

}  // namespace hdmann
