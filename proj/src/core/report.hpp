#pragma once

#include <string>
#include <vector>

#include "core/analysis.hpp"
#include "core/config.hpp"

namespace hdmann {

inline constexpr int kReportSchemaVersion = 1;

struct EvalReport {
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  int episodes = 0;
};

// Frozen-checkpoint evaluation over eval_episodes test episodes, using the
// mode/backend/criterion from the config. Deterministic for a fixed seed.
EvalReport run_eval(const ControllerParams& params, const GlyphDataset& dataset,
                    const RunConfig& config);

// Eq-9 style robustness grid over alphas x dims x sigmas from the config.
std::vector<RobustnessPoint> run_sigma_grid(const RunConfig& config);

// --- artifact writers (deterministic byte-for-byte for fixed inputs) -------

void write_eval_json(const EvalReport& report, const RunConfig& config, const std::string& path);

void write_sigma_grid_csv(const std::vector<RobustnessPoint>& grid, const std::string& path);
void write_sigma_grid_json(const std::vector<RobustnessPoint>& grid, const RunConfig& config,
                           const std::string& path);

void write_noise_sweep_csv(const std::vector<NoiseSweepPoint>& points, const std::string& path);
void write_noise_sweep_json(const std::vector<NoiseSweepPoint>& points, const RunConfig& config,
                            const std::string& path);

void write_dimension_sweep_csv(const std::vector<DimensionSweepPoint>& points,
                               const std::string& path);
void write_dimension_sweep_json(const std::vector<DimensionSweepPoint>& points,
                                const RunConfig& config, const std::string& path);

// Renders one or more JSON reports as a human-readable summary. Returns the
// text; writes it to out_path unless out_path is empty.
std::string render_reports(const std::vector<std::string>& json_paths,
                           const std::string& out_path);

}  // namespace hdmann
