#include "core/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "core/common.hpp"
#include "core/kvmem.hpp"

namespace hdmann {

double sigma_lambda_theory(double alpha, int d, double sigma_rel) {
  if (alpha < 0.0) throw DomainError("sigma_lambda_theory: alpha must be >= 0");
  if (d < 1) throw ValidationError("sigma_lambda_theory: d must be >= 1");
  if (sigma_rel < 0.0) throw ValidationError("sigma_lambda_theory: sigma_rel must be >= 0");
  return std::sqrt(2.0 * alpha / d) * sigma_rel;
}

RobustnessPoint sigma_lambda_empirical(double alpha, int d, double sigma_rel, int trials,
                                       Rng& rng) {
  if (trials < 1) throw ValidationError("sigma_lambda_empirical: trials must be >= 1");
  if (d < 2 || d % 2 != 0) throw ValidationError("sigma_lambda_empirical: d must be even");
  int half = d / 2;
  int overlap = static_cast<int>(std::lround(alpha * d / 2.0));
  if (alpha < 0.0 || overlap > half)
    throw DomainError("sigma_lambda_empirical: overlap infeasible for alpha/d");

  // Balanced pair with exact overlap: b is 1 on [0, half); a is 1 on
  // [0, overlap) and on [half, half + (half - overlap)).
  std::vector<uint8_t> a(static_cast<size_t>(d), 0);
  for (int i = 0; i < overlap; ++i) a[static_cast<size_t>(i)] = 1;
  for (int i = 0; i < half - overlap; ++i) a[static_cast<size_t>(half + i)] = 1;

  double sum = 0.0, sumsq = 0.0;
  for (int t = 0; t < trials; ++t) {
    double dot = 0.0;
    for (int i = 0; i < half; ++i) {  // b's 1-cells carry the programming noise
      double stored = sigma_rel == 0.0 ? 1.0 : rng.normal(1.0, sigma_rel);
      if (a[static_cast<size_t>(i)]) dot += stored;
    }
    double lambda = scaled_dot_binary(dot, d);
    sum += lambda;
    sumsq += lambda * lambda;
  }
  RobustnessPoint p;
  p.alpha = alpha;
  p.d = d;
  p.sigma_rel = sigma_rel;
  p.trials = trials;
  p.sigma_theory = sigma_lambda_theory(alpha, d, sigma_rel);
  p.mean_empirical = sum / trials;
  double var = trials > 1 ? (sumsq - sum * sum / trials) / (trials - 1) : 0.0;
  p.sigma_empirical = std::sqrt(std::max(0.0, var));
  return p;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("percentile of empty set");
  std::sort(values.begin(), values.end());
  double rank = p / 100.0 * (static_cast<double>(values.size()) - 1.0);
  size_t lo = static_cast<size_t>(std::floor(rank));
  size_t hi = static_cast<size_t>(std::ceil(rank));
  double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

MarginReport margin_stats(const std::vector<QueryTrace>& traces,
                          const std::vector<std::vector<int>>& support_labels_per_episode) {
  MarginReport report;
  for (size_t ep = 0; ep < support_labels_per_episode.size(); ++ep) {
    const auto& labels = support_labels_per_episode[ep];
    bool multi_class = false;
    for (size_t i = 1; i < labels.size(); ++i)
      if (labels[i] != labels[0]) { multi_class = true; break; }
    if (!multi_class) {
      std::cerr << "margin_stats: skipping single-class episode " << ep << "\n";
      ++report.episodes_skipped;
      continue;
    }
    std::vector<double> intra, inter;
    for (const auto& t : traces) {
      if (t.episode_id != static_cast<int>(ep)) continue;
      if (t.alphas.size() != labels.size())
        throw ValidationError("margin_stats: trace width does not match support labels");
      for (size_t s = 0; s < labels.size(); ++s) {
        (labels[s] == t.true_label ? intra : inter).push_back(t.alphas[s]);
      }
    }
    if (intra.empty() || inter.empty()) {
      ++report.episodes_skipped;
      continue;
    }
    report.per_episode_margin.push_back(percentile(intra, 10.0) - percentile(inter, 90.0));
  }
  report.episodes_used = static_cast<int>(report.per_episode_margin.size());
  if (report.episodes_used > 0) {
    double sum = 0.0;
    for (double m : report.per_episode_margin) sum += m;
    report.average_margin = sum / report.episodes_used;
  }
  return report;
}

OccupancyStats occupancy_stats(const std::vector<BinaryVec>& embeddings) {
  if (embeddings.empty()) throw ValidationError("occupancy_stats: no embeddings");
  OccupancyStats s;
  s.count = static_cast<int>(embeddings.size());
  double sum = 0.0, sumsq = 0.0;
  for (const auto& v : embeddings) {
    double r = occupancy_ratio(v);
    sum += r;
    sumsq += r * r;
  }
  s.mean = sum / s.count;
  double var = s.count > 1 ? (sumsq - sum * sum / s.count) / (s.count - 1) : 0.0;
  s.stddev = std::sqrt(std::max(0.0, var));
  return s;
}

std::vector<NoiseSweepPoint> noise_sweep(const ControllerParams& params,
                                         const GlyphDataset& dataset, Split split,
                                         const NoiseSweepConfig& config) {
  if (config.episodes < 1) throw ValidationError("noise_sweep: episodes must be >= 1");
  for (double level : config.levels)
    if (level < 0.0) throw ValidationError("noise_sweep: negative variation level");

  size_t cells = config.levels.size() * config.layouts.size();
  std::vector<double> acc_sum(cells, 0.0), acc_sumsq(cells, 0.0);

  AugmentSpec no_augment;
  no_augment.enabled = false;
  Rng episode_rng = Rng::stream(config.seed, "sweep-episodes");

  for (int ep = 0; ep < config.episodes; ++ep) {
    Episode episode = sample_episode(dataset, split, config.ways, config.shots, config.batch,
                                     no_augment, episode_rng);
    int mn = static_cast<int>(episode.support_images.size());
    int b = static_cast<int>(episode.query_images.size());

    // One embedding pass per episode, shared across all levels and layouts.
    std::vector<Image> all = episode.support_images;
    all.insert(all.end(), episode.query_images.begin(), episode.query_images.end());
    Tensor e = embed_batch(params, all);
    int d = e.dim(1);
    auto row = [&e, d](int i) {
      return std::span<const double>(e.ptr() + static_cast<int64_t>(i) * d,
                                     static_cast<size_t>(d));
    };
    std::vector<BipolarVec> support_bip, query_bip;
    std::vector<BinaryVec> support_bin, query_bin;
    for (int i = 0; i < mn; ++i) {
      support_bip.push_back(clip_to_bipolar(row(i)));
      support_bin.push_back(clip_to_binary(row(i)));
    }
    for (int i = 0; i < b; ++i) {
      query_bip.push_back(clip_to_bipolar(row(mn + i)));
      query_bin.push_back(clip_to_binary(row(mn + i)));
    }
    ValueMemory values = ValueMemory::from_labels(episode.support_labels, episode.ways);

    for (size_t li = 0; li < config.levels.size(); ++li) {
      double level = config.levels[li];
      PcmDeviceParams p = config.base;
      p.prog_var = level;
      if (config.co_scale_read_noise) {
        p.read_noise = config.base.prog_var > 0.0
                           ? config.base.read_noise * (level / config.base.prog_var)
                           : 0.0;
      }
      for (size_t yi = 0; yi < config.layouts.size(); ++yi) {
        uint64_t tag = (static_cast<uint64_t>(ep) << 16) | (li << 4) | yi;
        Rng prog_rng = Rng::stream(config.seed, "pcm-program", tag);
        Rng read_rng = Rng::stream(config.seed, "pcm-read", tag);
        SharpeningSpec sharpening;
        int correct = 0;
        if (config.layouts[yi] == PcmLayout::kBipolarDifferential) {
          sharpening.kind = Sharpening::kAbsolute;
          PcmArrayState state = program_bipolar(support_bip, p, prog_rng);
          auto scores = similarities_via_crossbar(state, query_bip, config.readout, read_rng);
          for (int qi = 0; qi < b; ++qi) {
            auto att = apply_attention(scores[static_cast<size_t>(qi)], sharpening, false);
            int pred = config.criterion == RankCriterion::kSumArgmax
                           ? predict_sum_argmax(readout(att.weights, values))
                           : predict_global_argmax(att.weights, episode.support_labels);
            if (pred == episode.query_labels[static_cast<size_t>(qi)]) ++correct;
          }
        } else {
          sharpening.kind = Sharpening::kBypass;
          PcmArrayState state = program_binary(support_bin, p, prog_rng);
          auto scores = similarities_via_crossbar(state, query_bin, config.readout, read_rng);
          for (int qi = 0; qi < b; ++qi) {
            auto att = apply_attention(scores[static_cast<size_t>(qi)], sharpening, false);
            int pred = config.criterion == RankCriterion::kSumArgmax
                           ? predict_sum_argmax(readout(att.weights, values))
                           : predict_global_argmax(att.weights, episode.support_labels);
            if (pred == episode.query_labels[static_cast<size_t>(qi)]) ++correct;
          }
        }
        double acc = static_cast<double>(correct) / b;
        size_t cell = li * config.layouts.size() + yi;
        acc_sum[cell] += acc;
        acc_sumsq[cell] += acc * acc;
      }
    }
  }

  std::vector<NoiseSweepPoint> out;
  for (size_t li = 0; li < config.levels.size(); ++li) {
    for (size_t yi = 0; yi < config.layouts.size(); ++yi) {
      size_t cell = li * config.layouts.size() + yi;
      NoiseSweepPoint pt;
      pt.level = config.levels[li];
      pt.layout = config.layouts[yi];
      pt.episodes = config.episodes;
      pt.mean_accuracy = acc_sum[cell] / config.episodes;
      double var = config.episodes > 1
                       ? (acc_sumsq[cell] - acc_sum[cell] * acc_sum[cell] / config.episodes) /
                             (config.episodes - 1)
                       : 0.0;
      pt.std_accuracy = std::sqrt(std::max(0.0, var));
      out.push_back(pt);
    }
  }
  return out;
}

std::vector<DimensionSweepPoint> dimension_sweep(const GlyphDataset& dataset,
                                                 const DimensionSweepConfig& config) {
  std::vector<DimensionSweepPoint> out;
  for (int d : config.dims) {
    if (d < 8) throw ValidationError("dimension_sweep: d must be >= 8");
    DimensionSweepPoint pt;
    pt.d = d;
    pt.sigma_theory = sigma_lambda_theory(0.5, d, config.sigma_rel);
    Rng sigma_rng = Rng::stream(config.seed, "sigma-lambda", static_cast<uint64_t>(d));
    pt.sigma_empirical =
        sigma_lambda_empirical(0.5, d, config.sigma_rel, config.sigma_trials, sigma_rng).sigma_empirical;

    // Occupancy spread of binary-clipped embeddings across random controller
    // initializations (HD-conformity of the init, no training involved). The
    // dense rows are independent and symmetric, so the bits behave like fair
    // coin flips and the spread should follow 1/(2 sqrt(d)).
    auto test_ids = dataset.class_indices(Split::kTest);
    if (test_ids.empty()) throw ValidationError("dimension_sweep: empty test split");
    const Image& probe = dataset.classes[static_cast<size_t>(test_ids[0])].samples[0];
    std::vector<BinaryVec> bins;
    const int inits = 160;
    for (int k = 0; k < inits; ++k) {
      Rng init_rng = Rng::stream(config.seed, "init", static_cast<uint64_t>(d) * 1000 + k);
      ControllerParams random_params =
          ControllerParams::init(Architecture::desk(d, dataset.image_size), init_rng);
      bins.push_back(clip_to_binary(embed(random_params, probe)));
    }
    pt.occupancy_std_random = occupancy_stats(bins).stddev;

    if (config.train) {
      TrainingConfig tc;
      tc.arch = Architecture::desk(d, dataset.image_size);
      tc.ways = config.train_ways;
      tc.shots = config.train_shots;
      tc.batch = config.batch;
      tc.max_episodes = config.train_episodes;
      tc.val_interval = std::max(1, config.train_episodes / 4);
      tc.val_episodes = 25;
      tc.seed = config.seed;
      TrainResult tr = run_training(tc, dataset);
      Rng eval_rng = Rng::stream(config.seed, "eval-episodes", static_cast<uint64_t>(d));
      AugmentSpec no_augment;
      no_augment.enabled = false;
      double sum = 0.0;
      for (int ep = 0; ep < config.eval_episodes; ++ep) {
        Episode episode = sample_episode(dataset, Split::kTest, config.ways, config.shots,
                                         config.batch, no_augment, eval_rng);
        sum += eval_episode_training_style(tr.best, episode, tc.sharpening);
      }
      pt.accuracy = sum / config.eval_episodes;
    }
    out.push_back(pt);
  }
  return out;
}

LogLogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("loglog_fit: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  double n = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  LogLogFit fit;
  double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  double ss_tot = syy - sy * sy / n;
  double intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double pred = intercept + fit.slope * std::log(x[i]);
    double resid = std::log(y[i]) - pred;
    ss_res += resid * resid;
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace hdmann
