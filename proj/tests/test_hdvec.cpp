#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "core/common.hpp"
#include "core/hdvec.hpp"
#include "core/rng.hpp"

using namespace hdmann;

namespace {

// Random balanced bipolar vector: exactly d/2 components are +1.
BipolarVec random_balanced(int d, Rng& rng) {
  std::vector<int> idx(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) idx[static_cast<size_t>(i)] = i;
  rng.shuffle(idx);
  BipolarVec v;
  v.c.assign(static_cast<size_t>(d), -1);
  for (int i = 0; i < d / 2; ++i) v.c[static_cast<size_t>(idx[static_cast<size_t>(i)])] = 1;
  return v;
}

}  // namespace

TEST_CASE("cosine similarity basics") {
  CHECK(cosine_similarity(RealVec{3, 4}, RealVec{3, 4}) == doctest::Approx(1.0));
  CHECK(cosine_similarity(RealVec{1, 0}, RealVec{0, 1}) == doctest::Approx(0.0));
  // direct formula: (1*1 + 1*(-1)) / (sqrt(2) * sqrt(2)) = 0
  CHECK(cosine_similarity(RealVec{1, 1}, RealVec{1, -1}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(cosine_similarity(RealVec{0, 0}, RealVec{1, 1}), DomainError);
  CHECK_THROWS_AS(cosine_similarity(RealVec{1}, RealVec{1, 2}), ValidationError);
}

TEST_CASE("clipping: sign with +1 tie rule, step function") {
  BipolarVec b = clip_to_bipolar(RealVec{0.3, -2.0, 0.0});
  CHECK(b.c == std::vector<int8_t>{1, -1, 1});
  CHECK(clip_to_bipolar(RealVec{5, 1e-9, 2}).c == std::vector<int8_t>{1, 1, 1});
  CHECK(clip_to_bipolar(RealVec{-0.001, 0.001}).c == std::vector<int8_t>{-1, 1});

  BinaryVec n = clip_to_binary(RealVec{0.3, -2.0});
  CHECK(n.c == std::vector<uint8_t>{1, 0});
}

TEST_CASE("clip composition identity for nonzero components") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    RealVec v(64);
    for (auto& x : v) {
      do {
        x = rng.normal();
      } while (x == 0.0);
    }
    CHECK(clip_to_binary(v).c == bipolar_to_binary(clip_to_bipolar(v)).c);
  }
}

TEST_CASE("bipolar/binary transforms and round trips") {
  BipolarVec bip;
  bip.c = {-1, 1, 1, -1};
  CHECK(bipolar_to_binary(bip).c == std::vector<uint8_t>{0, 1, 1, 0});
  BipolarVec all_plus;
  all_plus.c = {1, 1, 1};
  CHECK(bipolar_to_binary(all_plus).c == std::vector<uint8_t>{1, 1, 1});

  BinaryVec bin;
  bin.c = {0, 1};
  CHECK(binary_to_bipolar(bin).c == std::vector<int8_t>{-1, 1});
  BinaryVec zeros;
  zeros.c = {0, 0};
  CHECK(binary_to_bipolar(zeros).c == std::vector<int8_t>{-1, -1});

  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    BipolarVec v = random_bipolar(97, rng);
    CHECK(binary_to_bipolar(bipolar_to_binary(v)).c == v.c);
  }
}

TEST_CASE("bipolar dot similarity equals real-embedded cosine exactly") {
  Rng rng(17);
  for (int t = 0; t < 25; ++t) {
    BipolarVec a = random_bipolar(128, rng);
    BipolarVec b = random_bipolar(128, rng);
    double dot = dot_similarity_bipolar(a, b);
    double cos = cosine_similarity(to_real(a), to_real(b));
    CHECK(dot == doctest::Approx(cos).epsilon(1e-12));
  }
  BipolarVec a = random_bipolar(33, rng);
  CHECK(dot_similarity_bipolar(a, a) == doctest::Approx(1.0));
  BipolarVec neg = a;
  for (auto& x : neg.c) x = static_cast<int8_t>(-x);
  CHECK(dot_similarity_bipolar(a, neg) == doctest::Approx(-1.0));
}

TEST_CASE("bipolar dot statistics at d=512") {
  // Oracle: sum of d iid +-1 products has mean 0 and std sqrt(d), so the
  // (1/d)-scaled dot has std 1/sqrt(512) = 0.044194.
  Rng rng(2024);
  const int pairs = 10000, d = 512;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < pairs; ++i) {
    BipolarVec a = random_bipolar(d, rng);
    BipolarVec b = random_bipolar(d, rng);
    double s = dot_similarity_bipolar(a, b);
    sum += s;
    sumsq += s * s;
  }
  double mean = sum / pairs;
  double std = std::sqrt((sumsq - sum * sum / pairs) / (pairs - 1));
  CHECK(std::fabs(mean) < 0.002);
  CHECK(std == doctest::Approx(0.0441941738).epsilon(0.05));
}

TEST_CASE("binary dot similarity on hand vectors") {
  BinaryVec a, b;
  a.c = {1, 1, 0, 0};
  CHECK(dot_similarity_binary(a, a) == doctest::Approx(1.0));  // d/2 ones, dot d/2
  b.c = {0, 0, 1, 1};
  CHECK(dot_similarity_binary(a, b) == doctest::Approx(0.0));  // disjoint supports
}

TEST_CASE("binary dot vs shifted bipolar dot: exact error term") {
  // The exact expansion gives
  //   (2/d) a^.b^ - (1/2)((1/d) a.b + 1) = (sum_a + sum_b) / (2d),
  // so the identity is exact when both vectors are balanced an the error is
  // the scaled component-sum imbalance otherwise.
  Rng rng(7);
  const int d = 512;
  for (int t = 0; t < 2000; ++t) {
    BipolarVec a = random_bipolar(d, rng);
    BipolarVec b = random_bipolar(d, rng);
    long sum_a = 0, sum_b = 0;
    for (int i = 0; i < d; ++i) {
      sum_a += a.c[static_cast<size_t>(i)];
      sum_b += b.c[static_cast<size_t>(i)];
    }
    double lhs = dot_similarity_binary(bipolar_to_binary(a), bipolar_to_binary(b)) -
                 0.5 * (dot_similarity_bipolar(a, b) + 1.0);
    double rhs = static_cast<double>(sum_a + sum_b) / (2.0 * d);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }

  // Balanced vectors: identity exact.
  for (int t = 0; t < 200; ++t) {
    BipolarVec a = random_balanced(d, rng);
    BipolarVec b = random_balanced(d, rng);
    double lhs = dot_similarity_binary(bipolar_to_binary(a), bipolar_to_binary(b));
    double rhs = 0.5 * (dot_similarity_bipolar(a, b) + 1.0);
    CHECK(lhs == rhs);
  }
}

TEST_CASE("binary norm follows the occupancy ratio exactly") {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    BipolarVec v = random_bipolar(256, rng);
    BinaryVec b = bipolar_to_binary(v);
    double occ = occupancy_ratio(b);
    double norm2 = 0.0;
    for (auto x : b.c) norm2 += x;
    CHECK(std::sqrt(norm2) == doctest::Approx(std::sqrt(occ * 256)).epsilon(1e-12));
    // occupancy of the transform = fraction of +1 in the bipolar original
    long plus = 0;
    for (auto x : v.c)
      if (x > 0) ++plus;
    CHECK(occ == doctest::Approx(static_cast<double>(plus) / 256).epsilon(1e-12));
  }
}

TEST_CASE("occupancy ratio basics and sampling spread") {
  BinaryVec v;
  v.c = {0, 1, 1, 0};
  CHECK(occupancy_ratio(v) == doctest::Approx(0.5));
  v.c = {1, 1, 1};
  CHECK(occupancy_ratio(v) == doctest::Approx(1.0));
  CHECK_THROWS_AS(occupancy_ratio(BinaryVec{}), DomainError);

  // Binomial oracle: std of the ratio is sqrt(1/4 / d) = 1/(2 sqrt(512)).
  Rng rng(31);
  const int draws = 10000, d = 512;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < draws; ++i) {
    double r = occupancy_ratio(bipolar_to_binary(random_bipolar(d, rng)));
    sum += r;
    sumsq += r * r;
  }
  double std = std::sqrt((sumsq - sum * sum / draws) / (draws - 1));
  CHECK(std == doctest::Approx(0.0220970869).epsilon(0.05));
}

TEST_CASE("random bipolar generation") {
  Rng a(77), b(77);
  CHECK(random_bipolar(512, a).c == random_bipolar(512, b).c);
  CHECK(random_bipolar(1, a).dim() == 1);
  int x = random_bipolar(1, a).c[0];
  CHECK((x == 1 || x == -1));
  CHECK_THROWS_AS(random_bipolar(0, a), ValidationError);

  // Quasi-orthogonality at d = 10,000: |alpha| < 0.05 is a 5-sigma event.
  Rng rng(123);
  int within = 0;
  const int pairs = 1000;
  for (int i = 0; i < pairs; ++i) {
    BipolarVec u = random_bipolar(10000, rng);
    BipolarVec v = random_bipolar(10000, rng);
    if (std::fabs(dot_similarity_bipolar(u, v)) < 0.05) ++within;
  }
  CHECK(within >= 999);
}

TEST_CASE("csv round trip") {
  RealVec r{1.5, -2.25, 3.141592653589793, 1e-300, -0.0};
  CHECK(real_from_csv_row(vec_to_csv_row(r)) == r);

  Rng rng(9);
  BipolarVec bip = random_bipolar(64, rng);
  CHECK(bipolar_from_csv_row(vec_to_csv_row(bip)).c == bip.c);
  BinaryVec bin = bipolar_to_binary(bip);
  CHECK(binary_from_csv_row(vec_to_csv_row(bin)).c == bin.c);

  CHECK_THROWS_AS(bipolar_from_csv_row("1,2"), ValidationError);
  CHECK_THROWS_AS(binary_from_csv_row("0,1,x"), ValidationError);
}

TEST_CASE("binary dump round trip is bit exact") {
  Rng rng(13);
  RealVec r(37);
  for (auto& x : r) x = rng.normal() * std::pow(10.0, rng.uniform_int(-20, 20));
  std::stringstream ss;
  save_vec(ss, r);
  LoadedVec lr = load_vec(ss);
  REQUIRE(lr.mode == VecMode::kReal);
  REQUIRE(lr.real.size() == r.size());
  for (size_t i = 0; i < r.size(); ++i) {
    // bit-exact, including signed zero
    CHECK(std::memcmp(&lr.real[i], &r[i], 8) == 0);
  }

  BipolarVec bip = random_bipolar(100, rng);
  std::stringstream s2;
  save_vec(s2, bip);
  CHECK(load_vec(s2).bipolar.c == bip.c);

  BinaryVec bin = bipolar_to_binary(random_bipolar(100, rng));
  std::stringstream s3;
  save_vec(s3, bin);
  CHECK(load_vec(s3).binary.c == bin.c);

  std::stringstream bad("nonsense");
  CHECK_THROWS_AS(load_vec(bad), IoError);
}
