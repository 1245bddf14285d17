#pragma once

#include <string>
#include <vector>

#include "core/controller.hpp"
#include "core/dataset.hpp"
#include "core/hdvec.hpp"
#include "core/rng.hpp"

namespace hdmann {

// Closed-form robustness law for the noisy binary cosine similarity:
// sigma(Lambda) = sqrt(2 alpha / d) * sigma_rel. Derived for nonnegative
// binary overlap counts, hence the domain error for alpha < 0.
double sigma_lambda_theory(double alpha, int d, double sigma_rel);

struct RobustnessPoint {
  double alpha = 0.0;
  int d = 0;
  double sigma_rel = 0.0;
  double sigma_theory = 0.0;
  double sigma_empirical = 0.0;
  double mean_empirical = 0.0;
  int trials = 0;
};

// Monte-Carlo counterpart: builds balanced binary pairs with exact overlap
// alpha*d/2, perturbs stored 1-cells with multiplicative N(1, sigma_rel^2)
// draws, and measures the spread of the (2/d)-scaled noisy dot product.
RobustnessPoint sigma_lambda_empirical(double alpha, int d, double sigma_rel, int trials,
                                       Rng& rng);

struct MarginReport {
  std::vector<double> per_episode_margin;  // p10(intra) - p90(inter)
  double average_margin = 0.0;
  int episodes_used = 0;
  int episodes_skipped = 0;  // single-class episodes
};

// Separation margin between intra-class and inter-class raw similarities,
// computed per episode from attention traces.
MarginReport margin_stats(const std::vector<QueryTrace>& traces,
                          const std::vector<std::vector<int>>& support_labels_per_episode);

struct OccupancyStats {
  double mean = 0.0;
  double stddev = 0.0;
  int count = 0;
};

OccupancyStats occupancy_stats(const std::vector<BinaryVec>& embeddings);

// Percentile with linear interpolation between order statistics.
double percentile(std::vector<double> values, double p);

// --- sweeps ---------------------------------------------------------------

struct NoiseSweepPoint {
  double level = 0.0;          // relative SET conductance variability
  PcmLayout layout = PcmLayout::kBinary;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  int episodes = 0;
};

struct NoiseSweepConfig {
  int ways = 5;
  int shots = 1;
  int batch = 32;
  int episodes = 500;
  std::vector<double> levels{0.0, 0.317, 1.0};
  std::vector<PcmLayout> layouts{PcmLayout::kBipolarDifferential, PcmLayout::kBinary};
  PcmDeviceParams base;        // profile whose prog_var is replaced per level
  ReadoutConfig readout;
  bool co_scale_read_noise = false;  // scale read noise with level/base.prog_var
  RankCriterion criterion = RankCriterion::kSumArgmax;
  uint64_t seed = 42;
};

// Accuracy vs conductance-variation level. Every episode's embeddings are
// computed once and reused across levels and layouts, so level curves are
// paired comparisons on the same data.
std::vector<NoiseSweepPoint> noise_sweep(const ControllerParams& params,
                                         const GlyphDataset& dataset, Split split,
                                         const NoiseSweepConfig& config);

struct DimensionSweepPoint {
  int d = 0;
  double accuracy = 0.0;             // training-style eval on the test split
  double sigma_theory = 0.0;         // at alpha=0.5, sigma_rel from config
  double sigma_empirical = 0.0;
  double occupancy_std_random = 0.0; // random-init controller embeddings
};

struct DimensionSweepConfig {
  std::vector<int> dims{128, 512, 2048};
  int train_episodes = 500;          // short schedule per dimension
  int eval_episodes = 200;
  int ways = 5;                      // evaluation problem
  int shots = 1;
  int train_ways = 5;                // training problem (episodic transfer)
  int train_shots = 1;
  int batch = 32;
  double sigma_rel = 0.317;
  int sigma_trials = 10000;
  bool train = true;                 // false: robustness/occupancy columns only
  uint64_t seed = 42;
};

std::vector<DimensionSweepPoint> dimension_sweep(const GlyphDataset& dataset,
                                                 const DimensionSweepConfig& config);

// Least-squares slope and R^2 of log(y) against log(x).
struct LogLogFit {
  double slope = 0.0;
  double r2 = 0.0;
};
LogLogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hdmann
