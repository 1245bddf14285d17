#include "core/kvmem.hpp"

#include <istream>
#include <ostream>

#include "core/common.hpp"

namespace hdmann {

const char* to_string(Backend b) { return b == Backend::kExact ? "exact" : "pcm"; }

Backend backend_from_string(const std::string& s) {
  if (s == "exact") return Backend::kExact;
  if (s == "pcm") return Backend::kPcm;
  throw ValidationError("unknown backend: " + s);
}

KeyValueMemory::KeyValueMemory(KvmemOptions options) : options_(options) {
  if (options_.backend == Backend::kPcm && options_.mode == VecMode::kReal)
    throw ValidationError("pcm backend requires bipolar or binary mode");
}

namespace {
void check_labels(const std::vector<int>& labels, int classes, size_t rows) {
  if (labels.size() != rows) throw ValidationError("write_support: label/vector count mismatch");
  for (int l : labels)
    if (l < 0 || l >= classes) throw ValidationError("write_support: label out of range");
}
}  // namespace

void KeyValueMemory::write_support(const std::vector<RealVec>& vectors,
                                   const std::vector<int>& labels, int classes) {
  if (options_.mode != VecMode::kReal) throw ValidationError("write_support: mode mismatch");
  if (vectors.empty()) throw ValidationError("write_support: empty support set");
  check_labels(labels, classes, vectors.size());
  int d = static_cast<int>(vectors[0].size());
  for (const auto& v : vectors)
    if (static_cast<int>(v.size()) != d) throw ValidationError("write_support: ragged vectors");
  real_rows_ = vectors;
  bipolar_rows_.clear();
  binary_rows_.clear();
  array_.reset();
  labels_ = labels;
  classes_ = classes;
  d_ = d;
  values_ = ValueMemory::from_labels(labels_, classes_);
}

void KeyValueMemory::write_support(const std::vector<BipolarVec>& vectors,
                                   const std::vector<int>& labels, int classes, Rng* program_rng) {
  if (options_.mode != VecMode::kBipolar) throw ValidationError("write_support: mode mismatch");
  if (vectors.empty()) throw ValidationError("write_support: empty support set");
  check_labels(labels, classes, vectors.size());
  int d = vectors[0].dim();
  for (const auto& v : vectors)
    if (v.dim() != d) throw ValidationError("write_support: ragged vectors");
  bipolar_rows_ = vectors;
  real_rows_.clear();
  binary_rows_.clear();
  array_.reset();
  labels_ = labels;
  classes_ = classes;
  d_ = d;
  values_ = ValueMemory::from_labels(labels_, classes_);
  program_crossbar(program_rng);
}

void KeyValueMemory::write_support(const std::vector<BinaryVec>& vectors,
                                   const std::vector<int>& labels, int classes, Rng* program_rng) {
  if (options_.mode != VecMode::kBinary) throw ValidationError("write_support: mode mismatch");
  if (vectors.empty()) throw ValidationError("write_support: empty support set");
  check_labels(labels, classes, vectors.size());
  int d = vectors[0].dim();
  for (const auto& v : vectors)
    if (v.dim() != d) throw ValidationError("write_support: ragged vectors");
  binary_rows_ = vectors;
  real_rows_.clear();
  bipolar_rows_.clear();
  array_.reset();
  labels_ = labels;
  classes_ = classes;
  d_ = d;
  values_ = ValueMemory::from_labels(labels_, classes_);
  program_crossbar(program_rng);
}

void KeyValueMemory::program_crossbar(Rng* program_rng) {
  if (options_.backend != Backend::kPcm) return;
  if (!program_rng) throw ValidationError("pcm backend needs a programming rng");
  if (options_.mode == VecMode::kBipolar) {
    array_ = program_bipolar(bipolar_rows_, options_.pcm, *program_rng, options_.wordlines,
                             options_.bitlines, options_.randomize_placement);
  } else {
    array_ = program_binary(binary_rows_, options_.pcm, *program_rng, options_.wordlines,
                            options_.bitlines, options_.randomize_placement);
  }
  if (options_.spatial_variability > 0.0)
    apply_spatial_variability(*array_, options_.spatial_variability, *program_rng);
}

QueryResult KeyValueMemory::finish(std::vector<double> sims, const SharpeningSpec& spec,
                                   bool normalize, RankCriterion criterion) const {
  QueryResult out;
  out.attention = apply_attention(sims, spec, normalize);
  out.probabilities = readout(out.attention.weights, values_);
  out.predicted = criterion == RankCriterion::kSumArgmax
                      ? predict_sum_argmax(out.probabilities)
                      : predict_global_argmax(out.attention.weights, labels_);
  return out;
}

QueryResult KeyValueMemory::query(const RealVec& q, const SharpeningSpec& spec, bool normalize,
                                  RankCriterion criterion) const {
  if (options_.mode != VecMode::kReal) throw ValidationError("query: mode mismatch");
  if (rows() == 0) throw ValidationError("query on empty memory");
  std::vector<double> sims(real_rows_.size());
  for (size_t i = 0; i < real_rows_.size(); ++i) sims[i] = cosine_similarity(q, real_rows_[i]);
  return finish(std::move(sims), spec, normalize, criterion);
}

QueryResult KeyValueMemory::query(const BipolarVec& q, const SharpeningSpec& spec, bool normalize,
                                  RankCriterion criterion, Rng* read_rng) const {
  if (options_.mode != VecMode::kBipolar) throw ValidationError("query: mode mismatch");
  if (rows() == 0) throw ValidationError("query on empty memory");
  std::vector<double> sims;
  if (options_.backend == Backend::kExact) {
    sims.resize(bipolar_rows_.size());
    for (size_t i = 0; i < bipolar_rows_.size(); ++i)
      sims[i] = dot_similarity_bipolar(q, bipolar_rows_[i]);
  } else {
    if (!read_rng) throw ValidationError("pcm backend needs a read rng");
    sims = similarity_via_crossbar(*array_, q, options_.readout, *read_rng);
  }
  return finish(std::move(sims), spec, normalize, criterion);
}

QueryResult KeyValueMemory::query(const BinaryVec& q, const SharpeningSpec& spec, bool normalize,
                                  RankCriterion criterion, Rng* read_rng) const {
  if (options_.mode != VecMode::kBinary) throw ValidationError("query: mode mismatch");
  if (rows() == 0) throw ValidationError("query on empty memory");
  std::vector<double> sims;
  if (options_.backend == Backend::kExact) {
    sims.resize(binary_rows_.size());
    for (size_t i = 0; i < binary_rows_.size(); ++i)
      sims[i] = dot_similarity_binary(q, binary_rows_[i]);
  } else {
    if (!read_rng) throw ValidationError("pcm backend needs a read rng");
    sims = similarity_via_crossbar(*array_, q, options_.readout, *read_rng);
  }
  return finish(std::move(sims), spec, normalize, criterion);
}

namespace {
constexpr uint32_t kSnapshotMagic = 0x314d4448;  // "HDM1"

void write_u32(std::ostream& os, uint32_t x) {
  unsigned char b[4] = {static_cast<unsigned char>(x), static_cast<unsigned char>(x >> 8),
                        static_cast<unsigned char>(x >> 16), static_cast<unsigned char>(x >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw IoError("truncated memory snapshot");
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}
}  // namespace

void KeyValueMemory::save_snapshot(std::ostream& os) const {
  if (rows() == 0) throw ValidationError("save_snapshot: empty memory");
  write_u32(os, kSnapshotMagic);
  os.put(static_cast<char>(options_.mode));
  write_u32(os, static_cast<uint32_t>(rows()));
  write_u32(os, static_cast<uint32_t>(classes_));
  for (int l : labels_) write_u32(os, static_cast<uint32_t>(l));
  for (int i = 0; i < rows(); ++i) {
    switch (options_.mode) {
      case VecMode::kReal: save_vec(os, real_rows_[static_cast<size_t>(i)]); break;
      case VecMode::kBipolar: save_vec(os, bipolar_rows_[static_cast<size_t>(i)]); break;
      case VecMode::kBinary: save_vec(os, binary_rows_[static_cast<size_t>(i)]); break;
    }
  }
}

void KeyValueMemory::load_snapshot(std::istream& is, Rng* program_rng) {
  if (read_u32(is) != kSnapshotMagic) throw IoError("bad memory snapshot magic");
  VecMode mode = static_cast<VecMode>(is.get());
  if (mode != options_.mode) throw ValidationError("snapshot mode does not match memory mode");
  uint32_t rows = read_u32(is);
  uint32_t classes = read_u32(is);
  std::vector<int> labels(rows);
  for (uint32_t i = 0; i < rows; ++i) labels[i] = static_cast<int>(read_u32(is));
  std::vector<RealVec> real;
  std::vector<BipolarVec> bipolar;
  std::vector<BinaryVec> binary;
  for (uint32_t i = 0; i < rows; ++i) {
    LoadedVec v = load_vec(is);
    if (v.mode != mode) throw IoError("snapshot row representation mismatch");
    switch (mode) {
      case VecMode::kReal: real.push_back(std::move(v.real)); break;
      case VecMode::kBipolar: bipolar.push_back(std::move(v.bipolar)); break;
      case VecMode::kBinary: binary.push_back(std::move(v.binary)); break;
    }
  }
  switch (mode) {
    case VecMode::kReal: write_support(real, labels, static_cast<int>(classes)); break;
    case VecMode::kBipolar:
      write_support(bipolar, labels, static_cast<int>(classes), program_rng);
      break;
    case VecMode::kBinary:
      write_support(binary, labels, static_cast<int>(classes), program_rng);
      break;
  }
}

}  // namespace hdmann
