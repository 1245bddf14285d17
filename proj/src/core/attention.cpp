#include "core/attention.hpp"

#include <cmath>

#include "core/common.hpp"

namespace hdmann {

const char* to_string(Sharpening kind) {
  switch (kind) {
    case Sharpening::kSoftabs: return "softabs";
    case Sharpening::kExponential: return "exp";
    case Sharpening::kAbsolute: return "abs";
    case Sharpening::kBypass: return "bypass";
  }
  return "?";
}

Sharpening sharpening_from_string(const std::string& s) {
  if (s == "softabs") return Sharpening::kSoftabs;
  if (s == "exp" || s == "exponential") return Sharpening::kExponential;
  if (s == "abs" || s == "absolute") return Sharpening::kAbsolute;
  if (s == "bypass") return Sharpening::kBypass;
  throw ValidationError("unknown sharpening kind: " + s);
}

namespace {
double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

double softabs(double alpha, double beta) {
  return logistic(beta * (alpha - 0.5)) + logistic(beta * (-alpha - 0.5));
}

double softabs_derivative(double alpha, double beta) {
  double s1 = logistic(beta * (alpha - 0.5));
  double s2 = logistic(beta * (-alpha - 0.5));
  return beta * s1 * (1.0 - s1) - beta * s2 * (1.0 - s2);
}

double sharpen(double alpha, const SharpeningSpec& spec) {
  switch (spec.kind) {
    case Sharpening::kSoftabs: return softabs(alpha, spec.beta);
    case Sharpening::kExponential: return std::exp(alpha);
    case Sharpening::kAbsolute: return std::fabs(alpha);
    case Sharpening::kBypass: return alpha;
  }
  return alpha;
}

double sharpen_derivative(double alpha, const SharpeningSpec& spec) {
  switch (spec.kind) {
    case Sharpening::kSoftabs: return softabs_derivative(alpha, spec.beta);
    case Sharpening::kExponential: return std::exp(alpha);
    case Sharpening::kAbsolute: return alpha < 0.0 ? -1.0 : 1.0;
    case Sharpening::kBypass: return 1.0;
  }
  return 1.0;
}

AttentionResult apply_attention(std::span<const double> similarities,
                                const SharpeningSpec& spec, bool normalize) {
  if (similarities.empty()) throw ValidationError("attention over empty key memory");
  AttentionResult r;
  r.similarities.assign(similarities.begin(), similarities.end());
  r.sharpened.resize(similarities.size());
  double sum = 0.0;
  for (size_t i = 0; i < similarities.size(); ++i) {
    r.sharpened[i] = sharpen(similarities[i], spec);
    sum += r.sharpened[i];
  }
  if (normalize) {
    if (sum == 0.0) throw DomainError("degenerate attention: sharpened scores sum to zero");
    r.weights.resize(r.sharpened.size());
    for (size_t i = 0; i < r.sharpened.size(); ++i) r.weights[i] = r.sharpened[i] / sum;
  } else {
    r.weights = r.sharpened;
  }
  return r;
}

AttentionResult attention_vector(const std::vector<RealVec>& keys, const RealVec& q,
                                 const SharpeningSpec& spec, bool normalize) {
  if (keys.empty()) throw ValidationError("attention_vector: empty key memory");
  std::vector<double> sims(keys.size());
  for (size_t i = 0; i < keys.size(); ++i) sims[i] = cosine_similarity(q, keys[i]);
  return apply_attention(sims, spec, normalize);
}

AttentionResult attention_vector(const std::vector<BipolarVec>& keys, const BipolarVec& q,
                                 const SharpeningSpec& spec, bool normalize) {
  if (keys.empty()) throw ValidationError("attention_vector: empty key memory");
  std::vector<double> sims(keys.size());
  for (size_t i = 0; i < keys.size(); ++i) sims[i] = dot_similarity_bipolar(q, keys[i]);
  return apply_attention(sims, spec, normalize);
}

AttentionResult attention_vector(const std::vector<BinaryVec>& keys, const BinaryVec& q,
                                 const SharpeningSpec& spec, bool normalize) {
  if (keys.empty()) throw ValidationError("attention_vector: empty key memory");
  std::vector<double> sims(keys.size());
  for (size_t i = 0; i < keys.size(); ++i) sims[i] = dot_similarity_binary(q, keys[i]);
  return apply_attention(sims, spec, normalize);
}

ValueMemory ValueMemory::from_labels(std::span<const int> labels, int classes) {
  if (classes < 1) throw ValidationError("value memory needs at least one class");
  ValueMemory v;
  v.classes = classes;
  v.rows.reserve(labels.size());
  for (int label : labels) {
    if (label < 0 || label >= classes) throw ValidationError("label out of range");
    std::vector<double> row(static_cast<size_t>(classes), 0.0);
    row[static_cast<size_t>(label)] = 1.0;
    v.rows.push_back(std::move(row));
  }
  return v;
}

std::vector<double> readout(std::span<const double> weights, const ValueMemory& values) {
  if (weights.size() != values.rows.size())
    throw ValidationError("readout: weight/value row count mismatch");
  std::vector<double> p(static_cast<size_t>(values.classes), 0.0);
  for (size_t i = 0; i < values.rows.size(); ++i) {
    const auto& row = values.rows[i];
    if (row.size() != static_cast<size_t>(values.classes))
      throw ValidationError("readout: ragged value row");
    int ones = 0;
    for (double x : row) {
      if (x != 0.0 && x != 1.0) throw ValidationError("readout: value row is not one-hot");
      if (x == 1.0) ++ones;
    }
    if (ones != 1) throw ValidationError("readout: value row is not one-hot");
    for (size_t j = 0; j < row.size(); ++j) p[j] += weights[i] * row[j];
  }
  return p;
}

const char* to_string(RankCriterion c) {
  return c == RankCriterion::kSumArgmax ? "sum-argmax" : "global-argmax";
}

RankCriterion criterion_from_string(const std::string& s) {
  if (s == "sum-argmax" || s == "sum_argmax") return RankCriterion::kSumArgmax;
  if (s == "global-argmax" || s == "global_argmax") return RankCriterion::kGlobalArgmax;
  throw ValidationError("unknown ranking criterion: " + s);
}

int predict_sum_argmax(std::span<const double> p) {
  if (p.empty()) throw ValidationError("predict_sum_argmax: empty probabilities");
  int best = 0;
  for (size_t j = 1; j < p.size(); ++j) {
    if (p[j] > p[static_cast<size_t>(best)]) best = static_cast<int>(j);
  }
  return best;
}

int predict_global_argmax(std::span<const double> weights, std::span<const int> labels) {
  if (weights.empty()) throw ValidationError("predict_global_argmax: empty weights");
  if (weights.size() != labels.size())
    throw ValidationError("predict_global_argmax: weight/label length mismatch");
  size_t best = 0;
  for (size_t i = 1; i < weights.size(); ++i) {
    if (weights[i] > weights[best]) best = i;
  }
  return labels[best];
}

}  // namespace hdmann
