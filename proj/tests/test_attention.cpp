#include <doctest.h>

#include <cmath>

#include "core/attention.hpp"
#include "core/common.hpp"
#include "core/rng.hpp"

using namespace hdmann;

TEST_CASE("softabs values at the reference points") {
  // 1/(1+e^(-10(a-0.5))) + 1/(1+e^(-10(-a-0.5))) evaluated directly.
  double eps0 = 2.0 / (1.0 + std::exp(5.0));
  CHECK(softabs(0.0, 10.0) == doctest::Approx(eps0).epsilon(1e-12));
  CHECK(softabs(0.0, 10.0) == doctest::Approx(0.0134).epsilon(0.01));

  double eps1 = 1.0 / (1.0 + std::exp(-5.0)) + 1.0 / (1.0 + std::exp(15.0));
  CHECK(softabs(1.0, 10.0) == doctest::Approx(eps1).epsilon(1e-12));
  CHECK(softabs(1.0, 10.0) == doctest::Approx(0.993307).epsilon(1e-5));
}

TEST_CASE("softabs is symmetric") {
  for (double a = 0.0; a <= 1.0; a += 0.01) {
    CHECK(softabs(-a, 10.0) == doctest::Approx(softabs(a, 10.0)).epsilon(1e-12));
  }
}

TEST_CASE("softabs satisfies the sharpening conditions on a dense grid") {
  const double beta = 10.0;
  double prev_pos = softabs(0.0, beta);
  for (double a = 0.001; a <= 1.0 + 1e-12; a += 0.001) {
    double e = softabs(a, beta);
    CHECK(e >= 0.0);
    CHECK(e > prev_pos);  // strictly increasing on (0, 1]
    prev_pos = e;
  }
  double prev_neg = softabs(-1.0, beta);
  for (double a = -0.999; a < 0.0; a += 0.001) {
    double e = softabs(a, beta);
    CHECK(e >= 0.0);
    CHECK(e < prev_neg);  // strictly decreasing on [-1, 0)
    prev_neg = e;
  }
  CHECK(softabs(0.0, beta) <= 0.014);
}

TEST_CASE("softabs derivative is zero at the origin and matches differences") {
  const double beta = 10.0, h = 1e-6;
  double fd0 = (softabs(h, beta) - softabs(-h, beta)) / (2.0 * h);
  CHECK(std::fabs(fd0) < 1e-6);
  CHECK(std::fabs(softabs_derivative(0.0, beta)) < 1e-12);

  for (double a : {-0.9, -0.4, 0.2, 0.5, 0.77}) {
    double fd = (softabs(a + h, beta) - softabs(a - h, beta)) / (2.0 * h);
    CHECK(softabs_derivative(a, beta) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("softabs inflection points sit at +-0.5") {
  // Sign change of the second difference, scanned at grid resolution 1e-3.
  const double beta = 10.0, h = 1e-3;
  auto second = [&](double a) {
    return softabs(a + h, beta) - 2.0 * softabs(a, beta) + softabs(a - h, beta);
  };
  double pos_flip = -10, neg_flip = -10;
  for (double a = 0.1; a < 0.9; a += h) {
    if (second(a) > 0 && second(a + h) <= 0) {
      pos_flip = a;
      break;
    }
  }
  for (double a = -0.9; a < -0.1; a += h) {
    if (second(a) < 0 && second(a + h) >= 0) {
      neg_flip = a;
      break;
    }
  }
  CHECK(pos_flip == doctest::Approx(0.5).epsilon(0.01));
  CHECK(neg_flip == doctest::Approx(-0.5).epsilon(0.01));
}

TEST_CASE("sharpen dispatches per kind") {
  SharpeningSpec exp_spec{Sharpening::kExponential, 10.0};
  CHECK(sharpen(0.3, exp_spec) == doctest::Approx(std::exp(0.3)));
  SharpeningSpec abs_spec{Sharpening::kAbsolute, 10.0};
  CHECK(sharpen(-0.3, abs_spec) == doctest::Approx(0.3));
  SharpeningSpec bypass{Sharpening::kBypass, 10.0};
  CHECK(sharpen(-0.3, bypass) == doctest::Approx(-0.3));
}

TEST_CASE("attention vector on a memory containing the query") {
  Rng rng(21);
  std::vector<BipolarVec> keys;
  for (int i = 0; i < 5; ++i) keys.push_back(random_bipolar(256, rng));
  SharpeningSpec spec;  // softabs
  AttentionResult r = attention_vector(keys, keys[2], spec, true);
  // alpha = 1 for the matching row; softabs is maximal there.
  for (size_t i = 0; i < 5; ++i) {
    if (i != 2) CHECK(r.weights[2] > r.weights[i]);
  }
  double sum = 0.0;
  for (double w : r.weights) sum += w;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("two-row attention weights match the direct formula") {
  // alpha = (1, 0): w_1 = eps(1) / (eps(1) + eps(0)), evaluated to 5 digits.
  double e1 = 1.0 / (1.0 + std::exp(-5.0)) + 1.0 / (1.0 + std::exp(15.0));
  double e0 = 2.0 / (1.0 + std::exp(5.0));
  double expected_w0 = e1 / (e1 + e0);
  SharpeningSpec spec;
  AttentionResult r = apply_attention(std::vector<double>{1.0, 0.0}, spec, true);
  CHECK(r.weights[0] == doctest::Approx(expected_w0).epsilon(1e-12));
  CHECK(r.weights[0] == doctest::Approx(0.98670).epsilon(1e-4));
  CHECK(r.weights[1] == doctest::Approx(0.01330).epsilon(1e-3));
  CHECK(r.similarities[0] == 1.0);  // raw alphas retained
}

TEST_CASE("normalization and degenerate attention") {
  SharpeningSpec bypass{Sharpening::kBypass, 10.0};
  CHECK_THROWS_AS(apply_attention(std::vector<double>{0.0, 0.0}, bypass, true), DomainError);
  AttentionResult raw = apply_attention(std::vector<double>{0.5, 0.25}, bypass, false);
  CHECK(raw.weights == raw.sharpened);  // unnormalized path passes scores through

  for (Sharpening kind : {Sharpening::kSoftabs, Sharpening::kExponential, Sharpening::kAbsolute}) {
    SharpeningSpec spec{kind, 10.0};
    AttentionResult r = apply_attention(std::vector<double>{0.9, -0.2, 0.1}, spec, true);
    double sum = 0.0;
    for (double w : r.weights) {
      CHECK(w >= 0.0);
      sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("readout computes class probabilities and validates one-hot rows") {
  ValueMemory v = ValueMemory::from_labels(std::vector<int>{0, 1}, 2);
  auto p = readout(std::vector<double>{0.6, 0.4}, v);
  CHECK(p[0] == doctest::Approx(0.6));
  CHECK(p[1] == doctest::Approx(0.4));

  auto one = readout(std::vector<double>{0.0, 1.0}, v);
  CHECK(one[0] == doctest::Approx(0.0));
  CHECK(one[1] == doctest::Approx(1.0));

  // 2-way 2-shot with labels (A,A,B,B)
  ValueMemory v22 = ValueMemory::from_labels(std::vector<int>{0, 0, 1, 1}, 2);
  auto p22 = readout(std::vector<double>{0.3, 0.3, 0.4, 0.0}, v22);
  CHECK(p22[0] == doctest::Approx(0.6));
  CHECK(p22[1] == doctest::Approx(0.4));

  ValueMemory bad = v;
  bad.rows[0][0] = 0.5;
  CHECK_THROWS_AS(readout(std::vector<double>{0.6, 0.4}, bad), ValidationError);
  ValueMemory two_hot = v;
  two_hot.rows[0][1] = 1.0;
  CHECK_THROWS_AS(readout(std::vector<double>{0.6, 0.4}, two_hot), ValidationError);
}

TEST_CASE("ranking criteria") {
  CHECK(predict_sum_argmax(std::vector<double>{0.6, 0.4}) == 0);
  CHECK(predict_sum_argmax(std::vector<double>{0.5, 0.5}) == 0);  // tie to lowest index

  std::vector<int> ab{0, 1};
  CHECK(predict_global_argmax(std::vector<double>{0.1, 0.9}, ab) == 1);

  // Constructed contrast: sum-argmax picks A, global-argmax picks B.
  std::vector<double> w{0.3, 0.3, 0.4, 0.0};
  std::vector<int> labels{0, 0, 1, 1};
  ValueMemory v = ValueMemory::from_labels(labels, 2);
  CHECK(predict_sum_argmax(readout(w, v)) == 0);
  CHECK(predict_global_argmax(w, labels) == 1);
}

TEST_CASE("one-shot problems: both criteria agree everywhere") {
  Rng rng(33);
  for (int t = 0; t < 200; ++t) {
    int m = 2 + rng.uniform_int(0, 8);
    std::vector<double> w(static_cast<size_t>(m));
    for (auto& x : w) x = rng.uniform();
    std::vector<int> labels(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) labels[static_cast<size_t>(i)] = i;
    ValueMemory v = ValueMemory::from_labels(labels, m);
    CHECK(predict_sum_argmax(readout(w, v)) == predict_global_argmax(w, labels));
  }
}
