#pragma once

#include <span>
#include <string>
#include <vector>

#include "core/hdvec.hpp"

namespace hdmann {

enum class Sharpening { kSoftabs, kExponential, kAbsolute, kBypass };

const char* to_string(Sharpening kind);
Sharpening sharpening_from_string(const std::string& s);

struct SharpeningSpec {
  Sharpening kind = Sharpening::kSoftabs;
  double beta = 10.0;  // softabs stiffness
};

// Soft absolute: a symmetric pair of sigmoids centred at +/-0.5. Near zero
// similarity it is almost flat at ~0.0134 (beta = 10), which is what makes
// uncorrelated support vectors receive (almost) no attention.
double softabs(double alpha, double beta);
double softabs_derivative(double alpha, double beta);

double sharpen(double alpha, const SharpeningSpec& spec);
double sharpen_derivative(double alpha, const SharpeningSpec& spec);

struct AttentionResult {
  std::vector<double> similarities;  // raw alpha values, kept for analysis
  std::vector<double> sharpened;     // epsilon values
  std::vector<double> weights;       // normalized (or raw) attention vector
};

// Sharpen + optionally normalize a vector of raw similarities. Throws
// DomainError if normalization is requested and the sharpened sum is zero.
AttentionResult apply_attention(std::span<const double> similarities,
                                const SharpeningSpec& spec, bool normalize);

// Similarity-per-row front ends. The key matrix is a list of rows in a
// single representation; q must match.
AttentionResult attention_vector(const std::vector<RealVec>& keys, const RealVec& q,
                                 const SharpeningSpec& spec, bool normalize);
AttentionResult attention_vector(const std::vector<BipolarVec>& keys, const BipolarVec& q,
                                 const SharpeningSpec& spec, bool normalize);
AttentionResult attention_vector(const std::vector<BinaryVec>& keys, const BinaryVec& q,
                                 const SharpeningSpec& spec, bool normalize);

// One-hot value memory.
struct ValueMemory {
  int classes = 0;
  std::vector<std::vector<double>> rows;

  static ValueMemory from_labels(std::span<const int> labels, int classes);
};

// p = w . V. Validates that every row of V is one-hot.
std::vector<double> readout(std::span<const double> weights, const ValueMemory& values);

enum class RankCriterion { kSumArgmax, kGlobalArgmax };

const char* to_string(RankCriterion c);
RankCriterion criterion_from_string(const std::string& s);

// Argmax over the class-probability vector; ties break to the lowest index.
int predict_sum_argmax(std::span<const double> p);

// Label of the single largest attention weight; ties break to the lowest row.
int predict_global_argmax(std::span<const double> weights, std::span<const int> labels);

}  // namespace hdmann
