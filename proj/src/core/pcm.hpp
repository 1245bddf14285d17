#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "core/hdvec.hpp"
#include "core/rng.hpp"

namespace hdmann {

// Stochastic phase-change-memory device model:
//
//   G(t) = N(0, Gr^2) + (G0 * N(1, Gp^2)) * t^(-nu * N(1, nuv^2))
//
// Programming draws (the SET multiplier and the drift exponent) are frozen
// once per program operation; read noise is drawn fresh on every read.
struct PcmDeviceParams {
  double g0 = 22.8e-6;        // mean SET conductance at t = 1 s [S]
  double nu = 0.0598;         // mean drift exponent
  double prog_var = 0.317;    // relative programming variability
  double read_noise = 0.496e-6;  // additive read-out noise std [S]
  double drift_var = 0.0907;  // relative drift variability
  double reset_g = 0.0;       // RESET conductance [S]

  // Consolidated parameter set (the default corner).
  static PcmDeviceParams nominal() { return PcmDeviceParams{}; }
  // Alternative fit with stronger drift spread and read noise.
  static PcmDeviceParams pessimistic() {
    PcmDeviceParams p;
    p.nu = 0.0715;
    p.drift_var = 0.225;
    p.read_noise = 0.926e-6;
    return p;
  }
  static PcmDeviceParams zero_noise() {
    PcmDeviceParams p;
    p.nu = 0.0;
    p.prog_var = 0.0;
    p.read_noise = 0.0;
    p.drift_var = 0.0;
    return p;
  }
  static PcmDeviceParams from_profile(const std::string& name);
};

enum class PcmLayout { kBinary, kBipolarDifferential };

const char* to_string(PcmLayout layout);

struct ReadoutConfig {
  double eval_time = 20.0;    // seconds since programming
  int adc_bits = 8;
  double adc_full_scale = 2.0 * 22.8e-6;  // clipped saturating range [S]
  bool quantize = true;       // per-device quantization before digital summation
};

// Programmed crossbar state. Conductances are stored as multipliers relative
// to g0 so that the zero-variability case accumulates exact integers and a
// noise-free read reproduces the software dot product bit for bit.
struct PcmArrayState {
  PcmLayout layout = PcmLayout::kBinary;
  int wordlines = 512;
  int bitlines = 2048;
  int rows = 0;          // stored support vectors
  int d = 0;             // components per vector (wordlines used)
  PcmDeviceParams params;

  // Per used bitline (rows for binary, 2*rows for bipolar), d entries each.
  std::vector<double> set_mult;    // N(1, Gp^2) draw for SET cells, 0 for RESET
  std::vector<double> drift_exp;   // nu * N(1, nuv^2), 0 for RESET cells
  std::vector<int> bitline_of;     // used line index -> physical bitline

  int used_bitlines() const { return layout == PcmLayout::kBinary ? rows : 2 * rows; }
  double* line(int i) { return set_mult.data() + static_cast<size_t>(i) * d; }
  const double* line(int i) const { return set_mult.data() + static_cast<size_t>(i) * d; }
  const double* line_drift(int i) const { return drift_exp.data() + static_cast<size_t>(i) * d; }
};

// One-off device: program and read once at time t.
double sample_device_conductance(const PcmDeviceParams& params, double t, Rng& rng);

// One support vector per bitline; 1 -> SET, 0 -> RESET.
PcmArrayState program_binary(const std::vector<BinaryVec>& keys, const PcmDeviceParams& params,
                             Rng& rng, int wordlines = 512, int bitlines = 2048,
                             bool randomize_placement = false, Rng* placement_rng = nullptr);

// Differential pair of adjacent bitlines per vector: +1 SET on the left
// line, -1 SET on the right line.
PcmArrayState program_bipolar(const std::vector<BipolarVec>& keys, const PcmDeviceParams& params,
                              Rng& rng, int wordlines = 512, int bitlines = 2048,
                              bool randomize_placement = false, Rng* placement_rng = nullptr);

// Scale SET multipliers by a per-bitline N(1, rel_std^2) draw.
void apply_spatial_variability(PcmArrayState& state, double per_bitline_rel_std, Rng& rng);

// I = U . G^T for a batch of binary voltage rows. Returns currents in
// conductance units (unit read voltage), one row per query, one column per
// used bitline. Fresh read noise per device per call; per-device ADC
// quantization before the digital bitline sum when cfg.quantize is set.
std::vector<double> crossbar_read(const PcmArrayState& state,
                                  const std::vector<BinaryVec>& queries,
                                  const ReadoutConfig& cfg, Rng& rng);

// In-memory similarity:  binary layout scores (2/d) q.K_i, bipolar layout
// scores (1/d) q.K_i via the two-phase differential read.
std::vector<double> similarity_via_crossbar(const PcmArrayState& state, const BinaryVec& q,
                                            const ReadoutConfig& cfg, Rng& rng);
std::vector<double> similarity_via_crossbar(const PcmArrayState& state, const BipolarVec& q,
                                            const ReadoutConfig& cfg, Rng& rng);

// Batched version (one shared evaluation time for the whole batch).
std::vector<std::vector<double>> similarities_via_crossbar(const PcmArrayState& state,
                                                           const std::vector<BinaryVec>& queries,
                                                           const ReadoutConfig& cfg, Rng& rng);
std::vector<std::vector<double>> similarities_via_crossbar(const PcmArrayState& state,
                                                           const std::vector<BipolarVec>& queries,
                                                           const ReadoutConfig& cfg, Rng& rng);

// Inspection dump: wordline, bitline, base conductance [S], drift exponent.
void export_array_csv(const PcmArrayState& state, std::ostream& os);

}  // namespace hdmann
