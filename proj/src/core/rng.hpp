#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace hdmann {

// Deterministic random stream. All randomness in the project flows from a
// single root seed split into named streams (init, episodes, pcm-program,
// pcm-read, ...) so that components can be varied independently without
// perturbing each other's draws. Gaussian sampling is implemented here
// (Marsaglia polar) instead of std::normal_distribution so that byte-level
// reproducibility does not depend on the standard library build.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Substream derived from (root, name, index).
  static Rng stream(uint64_t root_seed, std::string_view name, uint64_t index = 0);

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi);

  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Fisher-Yates; uses uniform_int so the permutation is stable across builds.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[static_cast<size_t>(i)], v[static_cast<size_t>(uniform_int(0, i))]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// 64-bit FNV-1a, used to derive stream seeds from names.
uint64_t fnv1a64(std::string_view s, uint64_t basis = 1469598103934665603ull);

}  // namespace hdmann
