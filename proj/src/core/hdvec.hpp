#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "core/rng.hpp"

namespace hdmann {

// High-dimensional vector representations. Real vectors come out of the
// embedding network; bipolar and binary vectors are the clipped forms used
// by the crossbar key memory.
using RealVec = std::vector<double>;

struct BipolarVec {
  std::vector<int8_t> c;  // every component is -1 or +1
  int dim() const { return static_cast<int>(c.size()); }
};

struct BinaryVec {
  std::vector<uint8_t> c;  // every component is 0 or 1
  int dim() const { return static_cast<int>(c.size()); }
};

enum class VecMode { kReal, kBipolar, kBinary };

const char* to_string(VecMode mode);
VecMode vec_mode_from_string(const std::string& s);

// Exact cosine similarity. Throws DomainError on zero-norm input (never a
// silent NaN).
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Component-wise sign with the tie at exactly 0 mapping to +1, so that
// clip_to_binary(v) == bipolar_to_binary(clip_to_bipolar(v)) for every v.
BipolarVec clip_to_bipolar(std::span<const double> v);

// Component-wise step: x > 0 -> 1, else 0.
BinaryVec clip_to_binary(std::span<const double> v);

BinaryVec bipolar_to_binary(const BipolarVec& v);   // (x + 1) / 2
BipolarVec binary_to_bipolar(const BinaryVec& v);   // 2x - 1

// Shared final scaling for integer dot products. The simulated crossbar path
// funnels its (noisy) accumulated dot through these same functions so that a
// zero-noise crossbar read is bit-identical to the exact software score.
inline double scaled_dot_bipolar(double dot, int d) { return dot / static_cast<double>(d); }
inline double scaled_dot_binary(double dot, int d) { return 2.0 * dot / static_cast<double>(d); }

// (1/d) a.b; equals cosine_similarity exactly because bipolar norms are
// always sqrt(d).
double dot_similarity_bipolar(const BipolarVec& a, const BipolarVec& b);

// (2/d) a.b; approximates (cos+1)/2 of the bipolar originals, exactly so for
// balanced vectors.
double dot_similarity_binary(const BinaryVec& a, const BinaryVec& b);

double occupancy_ratio(const BinaryVec& v);

BipolarVec random_bipolar(int d, Rng& rng);

// Real view of a clipped vector (components as doubles).
RealVec to_real(const BipolarVec& v);
RealVec to_real(const BinaryVec& v);

// --- Serialization -------------------------------------------------------
//
// CSV: one flat row, components in order. Reals are printed with enough
// digits to round-trip bit-exactly.
std::string vec_to_csv_row(std::span<const double> v);
std::string vec_to_csv_row(const BipolarVec& v);
std::string vec_to_csv_row(const BinaryVec& v);
RealVec real_from_csv_row(const std::string& line);
BipolarVec bipolar_from_csv_row(const std::string& line);
BinaryVec binary_from_csv_row(const std::string& line);

// Binary dump: magic, representation tag, dimension, then raw components
// (f64 little-endian for real, one byte each for bipolar/binary).
void save_vec(std::ostream& os, std::span<const double> v);
void save_vec(std::ostream& os, const BipolarVec& v);
void save_vec(std::ostream& os, const BinaryVec& v);

struct LoadedVec {
  VecMode mode;
  RealVec real;
  BipolarVec bipolar;
  BinaryVec binary;
};
LoadedVec load_vec(std::istream& is);

std::string format_double(double x);  // shortest round-trip decimal form

}  // namespace hdmann
