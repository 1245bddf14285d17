#include "core/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "core/common.hpp"

namespace hdmann {

namespace {

enum class Kind { kInt, kU64, kReal, kBool, kEnum, kString, kRealList, kIntList };

struct KeySpec {
  Kind kind;
  std::string def;
  double min;
  double max;  // max <= min means unbounded above
  std::vector<std::string> choices;

  KeySpec(Kind k, std::string d, double mn = 0.0, double mx = 0.0,
          std::vector<std::string> ch = {})
      : kind(k), def(std::move(d)), min(mn), max(mx), choices(std::move(ch)) {}
};

const std::map<std::string, KeySpec>& schema() {
  static const std::map<std::string, KeySpec> s = {
      {"dim", {Kind::kInt, "512", 1}},
      {"image_size", {Kind::kInt, "32", 8}},
      {"arch", {Kind::kString, "desk"}},
      {"problem", {Kind::kString, "5x1"}},
      {"batch", {Kind::kInt, "32", 1}},
      {"episodes", {Kind::kInt, "50000", 1}},
      {"val_interval", {Kind::kInt, "500", 1}},
      {"val_episodes", {Kind::kInt, "250", 1}},
      {"patience", {Kind::kInt, "0", 0}},
      {"lr", {Kind::kReal, "0.0001", 1e-12}},
      {"adam_beta1", {Kind::kReal, "0.9", 0.0, 1.0}},
      {"adam_beta2", {Kind::kReal, "0.999", 0.0, 1.0}},
      {"adam_eps", {Kind::kReal, "1e-08", 1e-16}},
      {"sharpening", {Kind::kEnum, "softabs", 0, 0, {"softabs", "exp", "abs", "bypass"}}},
      {"beta", {Kind::kReal, "10", 1e-9}},
      {"regularizer", {Kind::kBool, "off"}},
      {"reg_a", {Kind::kReal, "100", 1e-9}},
      {"reg_delta", {Kind::kReal, "0.0001", 1e-12}},
      {"reg_weight_oc", {Kind::kReal, "10", 0.0}},
      {"reg_weight_aux", {Kind::kReal, "0.1", 0.0}},
      {"augment", {Kind::kBool, "on"}},
      {"augment_shift_std", {Kind::kReal, "2.5", 0.0}},
      {"augment_rot_std", {Kind::kReal, "0.2617993877991494", 0.0}},
      {"mode", {Kind::kEnum, "real", 0, 0, {"real", "bipolar", "binary"}}},
      {"backend", {Kind::kEnum, "exact", 0, 0, {"exact", "pcm"}}},
      {"criterion", {Kind::kEnum, "sum-argmax", 0, 0, {"sum-argmax", "global-argmax"}}},
      {"infer_sharpening",
       {Kind::kEnum, "auto", 0, 0, {"auto", "softabs", "exp", "abs", "bypass"}}},
      {"infer_normalize", {Kind::kEnum, "auto", 0, 0, {"auto", "on", "off"}}},
      {"pcm_profile",
       {Kind::kEnum, "nominal", 0, 0, {"nominal", "pessimistic", "zero-noise"}}},
      {"pcm_g0", {Kind::kString, ""}},          // empty -> profile value
      {"pcm_nu", {Kind::kString, ""}},
      {"pcm_prog_var", {Kind::kString, ""}},
      {"pcm_read_noise", {Kind::kString, ""}},
      {"pcm_drift_var", {Kind::kString, ""}},
      {"pcm_t_eval", {Kind::kReal, "20", 1e-9}},
      {"adc_bits", {Kind::kInt, "8", 1}},
      {"adc_quantize", {Kind::kBool, "on"}},
      {"adc_full_scale", {Kind::kReal, "4.56e-05", 1e-12}},
      {"wordlines", {Kind::kInt, "512", 1}},
      {"bitlines", {Kind::kInt, "2048", 1}},
      {"randomize_placement", {Kind::kBool, "off"}},
      {"spatial_variability", {Kind::kReal, "0", 0.0}},
      {"levels", {Kind::kRealList, "0,0.317,1.0"}},
      {"layouts", {Kind::kString, "bipolar,binary"}},
      {"co_scale_read_noise", {Kind::kBool, "off"}},
      {"alphas", {Kind::kRealList, "0.1,0.25,0.5"}},
      {"sigmas", {Kind::kRealList, "0.1,0.317,0.5"}},
      {"dims", {Kind::kIntList, "128,512,2048"}},
      {"sweep_train_episodes", {Kind::kInt, "500", 1}},
      {"trials", {Kind::kInt, "10000", 1}},
      {"eval_episodes", {Kind::kInt, "1000", 1}},
      {"classes", {Kind::kInt, "60", 2}},
      {"samples", {Kind::kInt, "20", 2}},
      {"seed", {Kind::kU64, "42"}},
      {"threads", {Kind::kInt, "0", 0}},
  };
  return s;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    double x = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': not a number: '" + value + "'");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    long long x = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': not an integer: '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw ValidationError("config key '" + key + "': expected on/off, got '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

void validate(const std::string& key, const KeySpec& spec, const std::string& value) {
  switch (spec.kind) {
    case Kind::kInt: {
      long long x = parse_int(key, value);
      if (x < static_cast<long long>(spec.min))
        throw ValidationError("config key '" + key + "': value " + value + " below minimum " +
                              std::to_string(static_cast<long long>(spec.min)));
      if (spec.max > spec.min && x > static_cast<long long>(spec.max))
        throw ValidationError("config key '" + key + "': value " + value + " above maximum");
      break;
    }
    case Kind::kU64: {
      try {
        size_t pos = 0;
        (void)std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ValidationError("config key '" + key + "': not an unsigned integer: '" + value + "'");
      }
      break;
    }
    case Kind::kReal: {
      double x = parse_real(key, value);
      if (x < spec.min)
        throw ValidationError("config key '" + key + "': value " + value +
                              " below minimum " + std::to_string(spec.min));
      if (spec.max > spec.min && x >= spec.max)
        throw ValidationError("config key '" + key + "': value " + value + " out of range");
      break;
    }
    case Kind::kBool:
      parse_bool(key, value);
      break;
    case Kind::kEnum: {
      for (const auto& c : spec.choices)
        if (value == c) return;
      std::string opts;
      for (const auto& c : spec.choices) opts += (opts.empty() ? "" : "|") + c;
      throw ValidationError("config key '" + key + "': '" + value + "' not one of " + opts);
    }
    case Kind::kString:
      break;
    case Kind::kRealList:
      for (const auto& tok : split_list(value)) parse_real(key, tok);
      break;
    case Kind::kIntList:
      for (const auto& tok : split_list(value)) parse_int(key, tok);
      break;
  }
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& [key, spec] : schema()) {
    values_[key] = spec.def;
    overridden_[key] = false;
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = schema().find(key);
  if (it == schema().end())
    throw ValidationError("unknown config key '" + key + "'");
  validate(key, it->second, value);
  values_[key] = value;
  overridden_[key] = true;
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto strip = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r");
      size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string stripped = strip(line);
    if (stripped.empty()) continue;
    auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config file line " + std::to_string(lineno) + ": expected key = value");
    set(strip(stripped.substr(0, eq)), strip(stripped.substr(eq + 1)));
  }
}

bool RunConfig::has_default(const std::string& key) const {
  auto it = overridden_.find(key);
  if (it == overridden_.end()) throw ValidationError("unknown config key '" + key + "'");
  return !it->second;
}

std::string RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("unknown config key '" + key + "'");
  return it->second;
}

int RunConfig::get_int(const std::string& key) const {
  return static_cast<int>(parse_int(key, get(key)));
}

uint64_t RunConfig::get_u64(const std::string& key) const { return std::stoull(get(key)); }

double RunConfig::get_real(const std::string& key) const { return parse_real(key, get(key)); }

bool RunConfig::get_bool(const std::string& key) const { return parse_bool(key, get(key)); }

std::vector<double> RunConfig::get_real_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& tok : split_list(get(key))) out.push_back(parse_real(key, tok));
  return out;
}

std::vector<int> RunConfig::get_int_list(const std::string& key) const {
  std::vector<int> out;
  for (const auto& tok : split_list(get(key))) out.push_back(static_cast<int>(parse_int(key, tok)));
  return out;
}

std::pair<int, int> RunConfig::problem() const {
  std::string p = get("problem");
  auto x = p.find('x');
  if (x == std::string::npos)
    throw ValidationError("problem must look like WAYSxSHOTS, e.g. 5x1: '" + p + "'");
  int ways = static_cast<int>(parse_int("problem", p.substr(0, x)));
  int shots = static_cast<int>(parse_int("problem", p.substr(x + 1)));
  if (ways < 2 || shots < 1) throw ValidationError("problem needs ways >= 2 and shots >= 1");
  return {ways, shots};
}

Architecture RunConfig::architecture() const {
  return Architecture::from_string(get("arch"), dim(), get_int("image_size"));
}

SharpeningSpec RunConfig::train_sharpening() const {
  SharpeningSpec spec;
  spec.kind = sharpening_from_string(get("sharpening"));
  spec.beta = get_real("beta");
  return spec;
}

TrainingConfig RunConfig::training() const {
  TrainingConfig tc;
  tc.arch = architecture();
  auto [ways, shots] = problem();
  tc.ways = ways;
  tc.shots = shots;
  tc.batch = get_int("batch");
  tc.max_episodes = get_int("episodes");
  tc.val_interval = get_int("val_interval");
  tc.val_episodes = get_int("val_episodes");
  tc.patience = get_int("patience");
  tc.adam.lr = get_real("lr");
  tc.adam.beta1 = get_real("adam_beta1");
  tc.adam.beta2 = get_real("adam_beta2");
  tc.adam.eps = get_real("adam_eps");
  tc.sharpening = train_sharpening();
  tc.regularizer.enabled = get_bool("regularizer");
  tc.regularizer.a = get_real("reg_a");
  tc.regularizer.delta = get_real("reg_delta");
  tc.regularizer.weight_oc = get_real("reg_weight_oc");
  tc.regularizer.weight_aux = get_real("reg_weight_aux");
  tc.augment.enabled = get_bool("augment");
  tc.augment.shift_std = get_real("augment_shift_std");
  tc.augment.rot_std = get_real("augment_rot_std");
  tc.seed = seed();
  return tc;
}

PcmDeviceParams RunConfig::pcm_params() const {
  PcmDeviceParams p = PcmDeviceParams::from_profile(get("pcm_profile"));
  auto override_real = [this](const char* key, double& target, double min) {
    std::string v = get(key);
    if (v.empty()) return;
    double x = parse_real(key, v);
    if (x < min)
      throw ValidationError(std::string("config key '") + key + "': value below " +
                            std::to_string(min));
    target = x;
  };
  override_real("pcm_g0", p.g0, 1e-12);
  override_real("pcm_nu", p.nu, 0.0);
  override_real("pcm_prog_var", p.prog_var, 0.0);
  override_real("pcm_read_noise", p.read_noise, 0.0);
  override_real("pcm_drift_var", p.drift_var, 0.0);
  return p;
}

ReadoutConfig RunConfig::readout_config() const {
  ReadoutConfig r;
  r.eval_time = get_real("pcm_t_eval");
  r.adc_bits = get_int("adc_bits");
  r.quantize = get_bool("adc_quantize");
  r.adc_full_scale = get_real("adc_full_scale");
  return r;
}

InferOptions RunConfig::infer_options() const {
  InferOptions o;
  o.mode = vec_mode_from_string(get("mode"));
  o.backend = backend_from_string(get("backend"));
  std::string sh = get("infer_sharpening");
  if (sh != "auto") {
    SharpeningSpec spec;
    spec.kind = sharpening_from_string(sh);
    spec.beta = get_real("beta");
    o.sharpening = spec;
  }
  std::string norm = get("infer_normalize");
  if (norm != "auto") o.normalize = (norm == "on");
  o.criterion = criterion_from_string(get("criterion"));
  o.pcm = pcm_params();
  o.readout = readout_config();
  o.wordlines = get_int("wordlines");
  o.bitlines = get_int("bitlines");
  o.randomize_placement = get_bool("randomize_placement");
  o.spatial_variability = get_real("spatial_variability");
  return o;
}

NoiseSweepConfig RunConfig::noise_sweep_config() const {
  NoiseSweepConfig c;
  auto [ways, shots] = problem();
  c.ways = ways;
  c.shots = shots;
  c.batch = get_int("batch");
  c.episodes = get_int("eval_episodes");
  c.levels = get_real_list("levels");
  c.layouts.clear();
  for (const auto& tok : split_list(get("layouts"))) {
    if (tok == "bipolar") c.layouts.push_back(PcmLayout::kBipolarDifferential);
    else if (tok == "binary") c.layouts.push_back(PcmLayout::kBinary);
    else throw ValidationError("layouts: expected bipolar/binary, got '" + tok + "'");
  }
  c.base = pcm_params();
  c.readout = readout_config();
  c.co_scale_read_noise = get_bool("co_scale_read_noise");
  c.criterion = criterion_from_string(get("criterion"));
  c.seed = seed();
  return c;
}

DimensionSweepConfig RunConfig::dimension_sweep_config() const {
  DimensionSweepConfig c;
  c.dims = get_int_list("dims");
  c.train_episodes = get_int("sweep_train_episodes");
  c.eval_episodes = std::min(get_int("eval_episodes"), 500);
  auto [ways, shots] = problem();
  c.ways = ways;
  c.shots = shots;
  c.batch = get_int("batch");
  c.sigma_rel = 0.317;
  c.sigma_trials = get_int("trials");
  c.seed = seed();
  return c;
}

}  // namespace hdmann
