#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "core/attention.hpp"
#include "core/hdvec.hpp"
#include "core/pcm.hpp"
#include "core/types.hpp"

namespace hdmann {

enum class Backend { kExact, kPcm };

const char* to_string(Backend b);
Backend backend_from_string(const std::string& s);

struct KvmemOptions {
  VecMode mode = VecMode::kReal;
  Backend backend = Backend::kExact;
  PcmDeviceParams pcm;
  ReadoutConfig readout;
  int wordlines = 512;
  int bitlines = 2048;
  bool randomize_placement = false;
  double spatial_variability = 0.0;  // per-bitline rel. std, applied after programming
};

struct QueryResult {
  AttentionResult attention;
  std::vector<double> probabilities;  // class readout p
  int predicted = -1;
};

// Episodic key-value memory: write-once-per-episode, read-many. The key
// matrix lives either in exact software arithmetic or on a simulated PCM
// crossbar; the value memory is always exact software.
class KeyValueMemory {
 public:
  explicit KeyValueMemory(KvmemOptions options);

  // Rewrites the whole memory with a fresh support set; previous contents
  // are discarded. With the pcm backend this programs the crossbar, drawing
  // programming variability from program_rng.
  void write_support(const std::vector<RealVec>& vectors, const std::vector<int>& labels,
                     int classes);
  void write_support(const std::vector<BipolarVec>& vectors, const std::vector<int>& labels,
                     int classes, Rng* program_rng = nullptr);
  void write_support(const std::vector<BinaryVec>& vectors, const std::vector<int>& labels,
                     int classes, Rng* program_rng = nullptr);

  QueryResult query(const RealVec& q, const SharpeningSpec& spec, bool normalize,
                    RankCriterion criterion) const;
  QueryResult query(const BipolarVec& q, const SharpeningSpec& spec, bool normalize,
                    RankCriterion criterion, Rng* read_rng = nullptr) const;
  QueryResult query(const BinaryVec& q, const SharpeningSpec& spec, bool normalize,
                    RankCriterion criterion, Rng* read_rng = nullptr) const;

  int rows() const { return static_cast<int>(labels_.size()); }
  int classes() const { return classes_; }
  int dim() const { return d_; }
  VecMode mode() const { return options_.mode; }
  Backend backend() const { return options_.backend; }
  const std::vector<int>& labels() const { return labels_; }
  const KvmemOptions& options() const { return options_; }
  const std::optional<PcmArrayState>& array_state() const { return array_; }

  // Snapshot of the stored support set (vector dump format plus the label
  // table), for replaying identical episodes across backends.
  void save_snapshot(std::ostream& os) const;
  // Replaces the memory contents with a snapshot; re-programs the crossbar
  // when the backend is pcm.
  void load_snapshot(std::istream& is, Rng* program_rng = nullptr);

 private:
  QueryResult finish(std::vector<double> sims, const SharpeningSpec& spec, bool normalize,
                     RankCriterion criterion) const;
  void program_crossbar(Rng* program_rng);

  KvmemOptions options_;
  int d_ = 0;
  int classes_ = 0;
  std::vector<int> labels_;
  ValueMemory values_;
  std::vector<RealVec> real_rows_;
  std::vector<BipolarVec> bipolar_rows_;
  std::vector<BinaryVec> binary_rows_;
  std::optional<PcmArrayState> array_;
};

}  // namespace hdmann
