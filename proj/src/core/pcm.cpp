#include "core/pcm.hpp"

#include <cmath>
#include <ostream>

#include "core/common.hpp"

namespace hdmann {

PcmDeviceParams PcmDeviceParams::from_profile(const std::string& name) {
  if (name == "nominal" || name == "default") return nominal();
  if (name == "pessimistic") return pessimistic();
  if (name == "zero-noise") return zero_noise();
  throw ValidationError("unknown pcm profile: " + name);
}

const char* to_string(PcmLayout layout) {
  return layout == PcmLayout::kBinary ? "binary" : "bipolar-differential";
}

double sample_device_conductance(const PcmDeviceParams& params, double t, Rng& rng) {
  if (t <= 0.0) throw DomainError("sample_device_conductance: t must be > 0");
  double prog = params.g0 * rng.normal(1.0, params.prog_var);
  double drift = params.nu * rng.normal(1.0, params.drift_var);
  double noise = params.read_noise == 0.0 ? 0.0 : rng.normal(0.0, params.read_noise);
  return noise + prog * std::pow(t, -drift);
}

namespace {

std::vector<int> choose_slots(int count, int available, bool randomize, Rng* rng) {
  std::vector<int> slots(static_cast<size_t>(available));
  for (int i = 0; i < available; ++i) slots[static_cast<size_t>(i)] = i;
  if (randomize && rng) rng->shuffle(slots);
  slots.resize(static_cast<size_t>(count));
  return slots;
}

void program_line(PcmArrayState& state, int line, const uint8_t* set_pattern,
                  const PcmDeviceParams& params, Rng& rng) {
  double* mult = state.line(line);
  double* drift = state.drift_exp.data() + static_cast<size_t>(line) * state.d;
  double reset_mult = params.reset_g / params.g0;
  for (int wl = 0; wl < state.d; ++wl) {
    if (set_pattern[wl]) {
      mult[wl] = rng.normal(1.0, params.prog_var);
      drift[wl] = params.nu * rng.normal(1.0, params.drift_var);
    } else {
      mult[wl] = reset_mult;
      drift[wl] = 0.0;
    }
  }
}

PcmArrayState make_state(PcmLayout layout, int rows, int d, const PcmDeviceParams& params,
                         int wordlines, int bitlines) {
  if (d > wordlines) throw ValidationError("pcm capacity exceeded: d > wordlines");
  int lines = layout == PcmLayout::kBinary ? rows : 2 * rows;
  if (lines > bitlines) throw ValidationError("pcm capacity exceeded: support rows > bitlines");
  PcmArrayState state;
  state.layout = layout;
  state.wordlines = wordlines;
  state.bitlines = bitlines;
  state.rows = rows;
  state.d = d;
  state.params = params;
  state.set_mult.assign(static_cast<size_t>(lines) * d, 0.0);
  state.drift_exp.assign(static_cast<size_t>(lines) * d, 0.0);
  state.bitline_of.resize(static_cast<size_t>(lines));
  return state;
}

}  // namespace

PcmArrayState program_binary(const std::vector<BinaryVec>& keys, const PcmDeviceParams& params,
                             Rng& rng, int wordlines, int bitlines, bool randomize_placement,
                             Rng* placement_rng) {
  if (keys.empty()) throw ValidationError("program_binary: no support vectors");
  int d = keys[0].dim();
  for (const auto& k : keys)
    if (k.dim() != d) throw ValidationError("program_binary: ragged support vectors");
  PcmArrayState state = make_state(PcmLayout::kBinary, static_cast<int>(keys.size()), d, params,
                                   wordlines, bitlines);
  Rng* prng = placement_rng ? placement_rng : &rng;
  auto slots = choose_slots(state.rows, bitlines, randomize_placement, prng);
  for (int i = 0; i < state.rows; ++i) {
    state.bitline_of[static_cast<size_t>(i)] = slots[static_cast<size_t>(i)];
    program_line(state, i, keys[static_cast<size_t>(i)].c.data(), params, rng);
  }
  return state;
}

PcmArrayState program_bipolar(const std::vector<BipolarVec>& keys, const PcmDeviceParams& params,
                              Rng& rng, int wordlines, int bitlines, bool randomize_placement,
                              Rng* placement_rng) {
  if (keys.empty()) throw ValidationError("program_bipolar: no support vectors");
  int d = keys[0].dim();
  for (const auto& k : keys)
    if (k.dim() != d) throw ValidationError("program_bipolar: ragged support vectors");
  PcmArrayState state = make_state(PcmLayout::kBipolarDifferential, static_cast<int>(keys.size()),
                                   d, params, wordlines, bitlines);
  Rng* prng = placement_rng ? placement_rng : &rng;
  auto pairs = choose_slots(state.rows, bitlines / 2, randomize_placement, prng);
  std::vector<uint8_t> plus(static_cast<size_t>(d)), minus(static_cast<size_t>(d));
  for (int i = 0; i < state.rows; ++i) {
    const auto& key = keys[static_cast<size_t>(i)].c;
    for (int wl = 0; wl < d; ++wl) {
      plus[static_cast<size_t>(wl)] = key[static_cast<size_t>(wl)] > 0 ? 1 : 0;
      minus[static_cast<size_t>(wl)] = key[static_cast<size_t>(wl)] < 0 ? 1 : 0;
    }
    state.bitline_of[static_cast<size_t>(2 * i)] = 2 * pairs[static_cast<size_t>(i)];
    state.bitline_of[static_cast<size_t>(2 * i + 1)] = 2 * pairs[static_cast<size_t>(i)] + 1;
    program_line(state, 2 * i, plus.data(), params, rng);
    program_line(state, 2 * i + 1, minus.data(), params, rng);
  }
  return state;
}

void apply_spatial_variability(PcmArrayState& state, double per_bitline_rel_std, Rng& rng) {
  if (per_bitline_rel_std < 0.0)
    throw ValidationError("apply_spatial_variability: std must be >= 0");
  for (int i = 0; i < state.used_bitlines(); ++i) {
    double s = rng.normal(1.0, per_bitline_rel_std);
    double* mult = state.line(i);
    for (int wl = 0; wl < state.d; ++wl) mult[wl] *= s;
  }
}

namespace {

// Normalized per-bitline accumulation (currents in units of g0). With zero
// noise/drift the SET multipliers are exactly 1.0, so the sums are exact
// integer dot counts; the nominal drift factor divides out as 1.0 and the
// final scaling matches the software similarity path bit for bit.
std::vector<double> read_normalized(const PcmArrayState& state,
                                    const std::vector<BinaryVec>& queries,
                                    const ReadoutConfig& cfg, Rng& rng) {
  if (cfg.eval_time <= 0.0) throw ValidationError("readout: eval_time must be > 0");
  if (cfg.adc_bits < 1) throw ValidationError("readout: adc_bits must be >= 1");
  int lines = state.used_bitlines();
  int d = state.d;
  for (const auto& q : queries)
    if (q.dim() != d) throw ValidationError("crossbar_read: query width != wordlines used");

  // Realized drift factor per device at the shared evaluation time.
  std::vector<double> realized(static_cast<size_t>(lines) * d);
  for (int i = 0; i < lines; ++i) {
    const double* mult = state.line(i);
    const double* drift = state.line_drift(i);
    double* out = realized.data() + static_cast<size_t>(i) * d;
    for (int wl = 0; wl < d; ++wl) {
      out[wl] = drift[wl] == 0.0 ? mult[wl] : mult[wl] * std::pow(cfg.eval_time, -drift[wl]);
    }
  }

  double noise_norm = state.params.read_noise / state.params.g0;
  double levels = static_cast<double>((1 << cfg.adc_bits) - 1);
  double fs_norm = cfg.adc_full_scale / state.params.g0;

  std::vector<double> currents(queries.size() * static_cast<size_t>(lines), 0.0);
  for (size_t qi = 0; qi < queries.size(); ++qi) {
    const uint8_t* u = queries[qi].c.data();
    for (int i = 0; i < lines; ++i) {
      const double* g = realized.data() + static_cast<size_t>(i) * d;
      double sum = 0.0;
      for (int wl = 0; wl < d; ++wl) {
        double dev = u[wl] ? g[wl] : 0.0;
        if (noise_norm != 0.0) dev += rng.normal(0.0, noise_norm);
        if (cfg.quantize) {
          double clipped = std::min(std::max(dev, 0.0), fs_norm);
          dev = std::round(clipped / fs_norm * levels) * fs_norm / levels;
        }
        sum += dev;
      }
      currents[qi * static_cast<size_t>(lines) + static_cast<size_t>(i)] = sum;
    }
  }
  return currents;
}

double nominal_drift_scale(const PcmArrayState& state, const ReadoutConfig& cfg) {
  return std::pow(cfg.eval_time, -state.params.nu);
}

}  // namespace

std::vector<double> crossbar_read(const PcmArrayState& state,
                                  const std::vector<BinaryVec>& queries,
                                  const ReadoutConfig& cfg, Rng& rng) {
  auto normalized = read_normalized(state, queries, cfg, rng);
  for (double& x : normalized) x *= state.params.g0;
  return normalized;
}

std::vector<std::vector<double>> similarities_via_crossbar(const PcmArrayState& state,
                                                           const std::vector<BinaryVec>& queries,
                                                           const ReadoutConfig& cfg, Rng& rng) {
  if (state.layout != PcmLayout::kBinary)
    throw ValidationError("binary query on a non-binary pcm layout");
  auto currents = read_normalized(state, queries, cfg, rng);
  double scale = nominal_drift_scale(state, cfg);
  std::vector<std::vector<double>> scores(queries.size());
  for (size_t qi = 0; qi < queries.size(); ++qi) {
    scores[qi].resize(static_cast<size_t>(state.rows));
    for (int i = 0; i < state.rows; ++i) {
      double dot = currents[qi * static_cast<size_t>(state.rows) + static_cast<size_t>(i)] / scale;
      scores[qi][static_cast<size_t>(i)] = scaled_dot_binary(dot, state.d);
    }
  }
  return scores;
}

std::vector<std::vector<double>> similarities_via_crossbar(const PcmArrayState& state,
                                                           const std::vector<BipolarVec>& queries,
                                                           const ReadoutConfig& cfg, Rng& rng) {
  if (state.layout != PcmLayout::kBipolarDifferential)
    throw ValidationError("bipolar query on a non-differential pcm layout");
  int lines = state.used_bitlines();
  // Two-phase read: the query's +1 mask first, then its complement.
  std::vector<BinaryVec> plus(queries.size()), minus(queries.size());
  for (size_t qi = 0; qi < queries.size(); ++qi) {
    if (queries[qi].dim() != state.d)
      throw ValidationError("crossbar_read: query width != wordlines used");
    plus[qi].c.resize(static_cast<size_t>(state.d));
    minus[qi].c.resize(static_cast<size_t>(state.d));
    for (int wl = 0; wl < state.d; ++wl) {
      plus[qi].c[static_cast<size_t>(wl)] = queries[qi].c[static_cast<size_t>(wl)] > 0 ? 1 : 0;
      minus[qi].c[static_cast<size_t>(wl)] = queries[qi].c[static_cast<size_t>(wl)] < 0 ? 1 : 0;
    }
  }
  auto i_plus = read_normalized(state, plus, cfg, rng);
  auto i_minus = read_normalized(state, minus, cfg, rng);
  double scale = nominal_drift_scale(state, cfg);
  std::vector<std::vector<double>> scores(queries.size());
  for (size_t qi = 0; qi < queries.size(); ++qi) {
    scores[qi].resize(static_cast<size_t>(state.rows));
    for (int i = 0; i < state.rows; ++i) {
      size_t left = qi * static_cast<size_t>(lines) + static_cast<size_t>(2 * i);
      size_t right = left + 1;
      double net = (i_plus[left] + i_minus[right]) - (i_plus[right] + i_minus[left]);
      scores[qi][static_cast<size_t>(i)] = scaled_dot_bipolar(net / scale, state.d);
    }
  }
  return scores;
}

std::vector<double> similarity_via_crossbar(const PcmArrayState& state, const BinaryVec& q,
                                            const ReadoutConfig& cfg, Rng& rng) {
  return similarities_via_crossbar(state, std::vector<BinaryVec>{q}, cfg, rng)[0];
}

std::vector<double> similarity_via_crossbar(const PcmArrayState& state, const BipolarVec& q,
                                            const ReadoutConfig& cfg, Rng& rng) {
  return similarities_via_crossbar(state, std::vector<BipolarVec>{q}, cfg, rng)[0];
}

void export_array_csv(const PcmArrayState& state, std::ostream& os) {
  os << "wordline,bitline,base_conductance,drift_exponent\n";
  for (int i = 0; i < state.used_bitlines(); ++i) {
    const double* mult = state.line(i);
    const double* drift = state.line_drift(i);
    for (int wl = 0; wl < state.d; ++wl) {
      os << wl << ',' << state.bitline_of[static_cast<size_t>(i)] << ','
         << format_double(mult[wl] * state.params.g0) << ',' << format_double(drift[wl]) << '\n';
    }
  }
}

}  // namespace hdmann
