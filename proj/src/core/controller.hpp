#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "core/autodiff.hpp"
#include "core/dataset.hpp"
#include "core/kvmem.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "core/types.hpp"

namespace hdmann {

// Feature-extractor layers; the final dense layer of width d is implicit.
struct LayerSpec {
  enum class Kind { kConv, kMaxPool };
  Kind kind = Kind::kConv;
  int filters = 0;
  int kernel = 0;
};

struct Architecture {
  int input_size = 32;
  int embedding_dim = 512;
  std::vector<LayerSpec> layers;

  // Scaled-down default: runs end to end on a laptop-class CPU in minutes.
  static Architecture desk(int d = 512, int input_size = 32);
  // Full-size variant: four conv layers of 128 filters.
  static Architecture full(int d = 512, int input_size = 32);
  static Architecture from_string(const std::string& desc, int d, int input_size);

  std::string to_string() const;       // feature-extractor description only
  int flattened_features() const;      // size after the conv stack
  int64_t param_count() const;
};

struct ControllerParams {
  Architecture arch;
  std::vector<Tensor> tensors;  // conv W,b ... dense W,b

  static ControllerParams init(const Architecture& arch, Rng& rng);
  int64_t param_count() const;

  void save(std::ostream& os) const;
  static ControllerParams load(std::istream& is);
  void save_file(const std::string& path) const;
  static ControllerParams load_file(const std::string& path);
};

// Embeddings for a batch of images, no gradient tracking. Returns [B, d].
Tensor embed_batch(const ControllerParams& params, const std::vector<Image>& images);

// Single-image embedding f_theta(x).
RealVec embed(const ControllerParams& params, const Image& image);

struct RegularizerSpec {
  double a = 100.0;        // softstep stiffness
  double delta = 1e-4;     // bump half-width
  double weight_oc = 10.0;
  double weight_aux = 0.1;
  bool enabled = false;
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Tensor> m, v;
  int64_t t = 0;

  static AdamState init(const ControllerParams& params, AdamConfig config);
};

void adam_step(ControllerParams& params, AdamState& state, const std::vector<Tensor>& grads);

struct TrainingStepRecord {
  int episode = 0;
  std::vector<double> query_losses;  // lambda_i
  double avg_loss = 0.0;             // (1/m) sum_i lambda_i
  double total_loss = 0.0;           // avg_loss + weighted regularizers
  Tensor probabilities;              // P, b x m
  Tensor truth;                      // Y, b x m
  double accuracy = 0.0;
};

// One training episode: support loading into the real-valued key memory,
// query evaluation with cosine + sharpening + normalization, log loss,
// backprop, Adam update. Memory contents never receive gradient updates.
TrainingStepRecord train_episode(ControllerParams& params, AdamState& adam,
                                 const Episode& episode, const SharpeningSpec& sharpening,
                                 const RegularizerSpec& reg);

// Training-style evaluation (cosine + sharpening + normalized readout); no
// parameter update.
double eval_episode_training_style(const ControllerParams& params, const Episode& episode,
                                   const SharpeningSpec& sharpening);

struct TrainingConfig {
  Architecture arch = Architecture::desk();
  int ways = 5;
  int shots = 1;
  int batch = 32;
  int max_episodes = 50000;
  int val_interval = 500;
  int val_episodes = 250;
  int patience = 0;  // checkpoints without improvement before early stop; 0 = off
  AdamConfig adam;
  SharpeningSpec sharpening;
  RegularizerSpec regularizer;
  AugmentSpec augment;
  uint64_t seed = 42;
};

struct TrainLogRow {
  int episode = 0;
  double loss = 0.0;
  double train_acc = 0.0;
  double val_acc = -1.0;  // < 0 when this episode is not a checkpoint
};

struct TrainResult {
  ControllerParams best;
  double best_val_acc = 0.0;
  int best_episode = 0;
  int episodes_run = 0;
  std::vector<TrainLogRow> log;
};

TrainResult run_training(const TrainingConfig& config, const GlyphDataset& dataset);

void write_training_log_csv(const std::vector<TrainLogRow>& log, std::ostream& os);

// --- inference -------------------------------------------------------------

struct QueryTrace {
  int episode_id = 0;
  int query_id = 0;
  int true_label = 0;
  int predicted = 0;
  std::vector<double> alphas;
  std::vector<double> weights;
};

struct InferOptions {
  VecMode mode = VecMode::kReal;
  Backend backend = Backend::kExact;
  // Defaults follow the hardware-friendly pipeline: absolute sharpening for
  // real/bipolar, bypass for binary (scores already nonnegative), attention
  // normalization off. Both are exposed because reporting setups may re-enable
  // them.
  std::optional<SharpeningSpec> sharpening;
  std::optional<bool> normalize;
  RankCriterion criterion = RankCriterion::kSumArgmax;
  PcmDeviceParams pcm;
  ReadoutConfig readout;
  int wordlines = 512;
  int bitlines = 2048;
  bool randomize_placement = false;
  double spatial_variability = 0.0;
};

SharpeningSpec default_inference_sharpening(VecMode mode);

// Frozen-parameter inference on one episode; returns the fraction of
// correctly classified queries. PCM rngs are only touched for the pcm
// backend.
double infer_episode(const ControllerParams& params, const Episode& episode,
                     const InferOptions& options, Rng* program_rng = nullptr,
                     Rng* read_rng = nullptr, std::vector<QueryTrace>* traces = nullptr,
                     int episode_id = 0);

void write_traces_csv(const std::vector<QueryTrace>& traces, std::ostream& os);

}  // namespace hdmann
