#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/analysis.hpp"
#include "core/controller.hpp"

namespace hdmann {

// Flat key=value run configuration with a fixed schema: unknown keys are
// rejected and every value is validated on assignment. Precedence is
// CLI override > config file > defaults, which callers get by applying
// load_file() before set().
class RunConfig {
 public:
  RunConfig();

  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);

  bool has_default(const std::string& key) const;  // true if never overridden
  std::string get(const std::string& key) const;
  int get_int(const std::string& key) const;
  uint64_t get_u64(const std::string& key) const;
  double get_real(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_real_list(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  // Assembled component configs.
  int dim() const { return get_int("dim"); }
  uint64_t seed() const { return get_u64("seed"); }
  Architecture architecture() const;
  TrainingConfig training() const;
  SharpeningSpec train_sharpening() const;
  PcmDeviceParams pcm_params() const;
  ReadoutConfig readout_config() const;
  InferOptions infer_options() const;
  NoiseSweepConfig noise_sweep_config() const;
  DimensionSweepConfig dimension_sweep_config() const;

  std::pair<int, int> problem() const;  // ways, shots

  const std::map<std::string, std::string>& items() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> overridden_;
};

}  // namespace hdmann
