#include <doctest.h>

#include <cmath>
#include <sstream>

#include "core/common.hpp"
#include "core/kvmem.hpp"

using namespace hdmann;

namespace {

KvmemOptions exact_opts(VecMode mode) {
  KvmemOptions o;
  o.mode = mode;
  return o;
}

KvmemOptions pcm_opts(VecMode mode, PcmDeviceParams p, bool quantize) {
  KvmemOptions o;
  o.mode = mode;
  o.backend = Backend::kPcm;
  o.pcm = p;
  o.readout.quantize = quantize;
  o.readout.eval_time = 20.0;
  return o;
}

}  // namespace

TEST_CASE("write then query returns the stored class") {
  Rng rng(1);
  KeyValueMemory mem(exact_opts(VecMode::kBipolar));
  std::vector<BipolarVec> keys;
  for (int i = 0; i < 5; ++i) keys.push_back(random_bipolar(256, rng));
  mem.write_support(keys, {0, 1, 2, 3, 4}, 5);
  CHECK(mem.rows() == 5);
  CHECK(mem.dim() == 256);

  SharpeningSpec spec;
  QueryResult r = mem.query(keys[3], spec, true, RankCriterion::kSumArgmax);
  CHECK(r.predicted == 3);
  CHECK(r.attention.similarities[3] == doctest::Approx(1.0));
}

TEST_CASE("five one-shot supports give an identity value matrix") {
  Rng rng(2);
  KeyValueMemory mem(exact_opts(VecMode::kReal));
  std::vector<RealVec> keys;
  for (int i = 0; i < 5; ++i) keys.push_back(to_real(random_bipolar(64, rng)));
  mem.write_support(keys, {0, 1, 2, 3, 4}, 5);
  SharpeningSpec bypass{Sharpening::kBypass, 10.0};
  // weight vector = e_2 under a query equal to key 2 after softabs-free
  // normalization: probabilities must be one-hot at class 2
  QueryResult r = mem.query(keys[2], SharpeningSpec{}, true, RankCriterion::kSumArgmax);
  CHECK(r.probabilities.size() == 5);
  CHECK(r.predicted == 2);
  (void)bypass;
}

TEST_CASE("rewriting discards the previous episode completely") {
  Rng rng(3);
  KeyValueMemory mem(exact_opts(VecMode::kBipolar));
  std::vector<BipolarVec> old_keys;
  for (int i = 0; i < 4; ++i) old_keys.push_back(random_bipolar(512, rng));
  mem.write_support(old_keys, {0, 1, 2, 3}, 4);

  std::vector<BipolarVec> new_keys;
  for (int i = 0; i < 4; ++i) new_keys.push_back(random_bipolar(512, rng));
  mem.write_support(new_keys, {0, 1, 2, 3}, 4);

  // A query matching an old key now sees only quasi-orthogonal rows: the
  // normalized softabs attention is near-uniform.
  QueryResult r = mem.query(old_keys[0], SharpeningSpec{}, true, RankCriterion::kSumArgmax);
  for (double w : r.attention.weights) {
    CHECK(w > 0.1);
    CHECK(w < 0.5);
  }
}

TEST_CASE("100-way 5-shot binary at d=512 stores 256,000 cells") {
  Rng rng(4);
  std::vector<BinaryVec> keys;
  std::vector<int> labels;
  for (int c = 0; c < 100; ++c) {
    for (int s = 0; s < 5; ++s) {
      keys.push_back(bipolar_to_binary(random_bipolar(512, rng)));
      labels.push_back(c);
    }
  }
  Rng prog(5);
  KeyValueMemory mem(pcm_opts(VecMode::kBinary, PcmDeviceParams{}, true));
  mem.write_support(keys, labels, 100, &prog);
  REQUIRE(mem.array_state().has_value());
  CHECK(mem.array_state()->set_mult.size() == 256000);
}

TEST_CASE("orthogonal query yields near-uniform normalized attention") {
  Rng rng(6);
  KeyValueMemory mem(exact_opts(VecMode::kBipolar));
  std::vector<BipolarVec> keys;
  for (int i = 0; i < 8; ++i) keys.push_back(random_bipolar(4096, rng));
  mem.write_support(keys, {0, 1, 2, 3, 4, 5, 6, 7}, 8);
  BipolarVec q = random_bipolar(4096, rng);
  QueryResult r = mem.query(q, SharpeningSpec{}, true, RankCriterion::kSumArgmax);
  for (double w : r.attention.weights) CHECK(w == doctest::Approx(1.0 / 8).epsilon(0.35));
}

TEST_CASE("mode and label validation") {
  Rng rng(7);
  KeyValueMemory mem(exact_opts(VecMode::kBipolar));
  std::vector<BinaryVec> wrong{bipolar_to_binary(random_bipolar(16, rng))};
  CHECK_THROWS_AS(mem.write_support(wrong, {0}, 1), ValidationError);
  std::vector<BipolarVec> keys{random_bipolar(16, rng)};
  CHECK_THROWS_AS(mem.write_support(keys, {5}, 2), ValidationError);
  CHECK_THROWS_AS(KeyValueMemory(pcm_opts(VecMode::kReal, PcmDeviceParams{}, true)),
                  ValidationError);
  // query before any write
  KeyValueMemory empty(exact_opts(VecMode::kReal));
  CHECK_THROWS_AS(empty.query(RealVec{1.0}, SharpeningSpec{}, true, RankCriterion::kSumArgmax),
                  ValidationError);
}

TEST_CASE("argmax decisions are invariant under positive rescaling of scores") {
  Rng rng(8);
  std::vector<BipolarVec> keys;
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) {
    keys.push_back(random_bipolar(256, rng));
    labels.push_back(i / 2);
  }
  KeyValueMemory mem(exact_opts(VecMode::kBipolar));
  mem.write_support(keys, labels, 5);
  SharpeningSpec abs_spec{Sharpening::kAbsolute, 10.0};
  for (int t = 0; t < 50; ++t) {
    BipolarVec q = random_bipolar(256, rng);
    QueryResult norm = mem.query(q, abs_spec, true, RankCriterion::kSumArgmax);
    QueryResult raw = mem.query(q, abs_spec, false, RankCriterion::kSumArgmax);
    CHECK(norm.predicted == raw.predicted);
  }
}

TEST_CASE("zero-noise pcm backend reproduces exact-backend scores and predictions") {
  Rng rng(9);
  PcmDeviceParams quiet = PcmDeviceParams::zero_noise();

  SUBCASE("bipolar differential layout") {
    std::vector<BipolarVec> keys;
    std::vector<int> labels;
    for (int i = 0; i < 5; ++i) {
      keys.push_back(random_bipolar(512, rng));
      labels.push_back(i);
    }
    KeyValueMemory exact(exact_opts(VecMode::kBipolar));
    exact.write_support(keys, labels, 5);
    Rng prog(10);
    KeyValueMemory pcm(pcm_opts(VecMode::kBipolar, quiet, false));
    pcm.write_support(keys, labels, 5, &prog);

    SharpeningSpec abs_spec{Sharpening::kAbsolute, 10.0};
    Rng read(11);
    for (int t = 0; t < 64; ++t) {
      BipolarVec q = random_bipolar(512, rng);
      QueryResult a = exact.query(q, abs_spec, false, RankCriterion::kSumArgmax);
      QueryResult b = pcm.query(q, abs_spec, false, RankCriterion::kSumArgmax, &read);
      CHECK(a.attention.similarities == b.attention.similarities);  // bit-exact
      CHECK(a.predicted == b.predicted);
    }
  }

  SUBCASE("binary layout") {
    std::vector<BinaryVec> keys;
    std::vector<int> labels;
    for (int i = 0; i < 5; ++i) {
      keys.push_back(bipolar_to_binary(random_bipolar(512, rng)));
      labels.push_back(i);
    }
    KeyValueMemory exact(exact_opts(VecMode::kBinary));
    exact.write_support(keys, labels, 5);
    Rng prog(12);
    KeyValueMemory pcm(pcm_opts(VecMode::kBinary, quiet, false));
    pcm.write_support(keys, labels, 5, &prog);

    SharpeningSpec bypass{Sharpening::kBypass, 10.0};
    Rng read(13);
    for (int t = 0; t < 64; ++t) {
      BinaryVec q = bipolar_to_binary(random_bipolar(512, rng));
      QueryResult a = exact.query(q, bypass, false, RankCriterion::kSumArgmax);
      QueryResult b = pcm.query(q, bypass, false, RankCriterion::kSumArgmax, &read);
      CHECK(a.attention.similarities == b.attention.similarities);
      CHECK(a.predicted == b.predicted);
    }
  }
}

TEST_CASE("memory is write-then-read-many: queries leave state bit-identical") {
  Rng rng(14);
  PcmDeviceParams p;  // noisy profile
  std::vector<BinaryVec> keys;
  for (int i = 0; i < 6; ++i) keys.push_back(bipolar_to_binary(random_bipolar(128, rng)));
  Rng prog(15);
  KeyValueMemory mem(pcm_opts(VecMode::kBinary, p, true));
  mem.write_support(keys, {0, 1, 2, 3, 4, 5}, 6, &prog);
  auto before_mult = mem.array_state()->set_mult;
  auto before_drift = mem.array_state()->drift_exp;
  Rng read(16);
  for (int t = 0; t < 10; ++t) {
    BinaryVec q = bipolar_to_binary(random_bipolar(128, rng));
    (void)mem.query(q, SharpeningSpec{Sharpening::kBypass, 10.0}, false,
                    RankCriterion::kSumArgmax, &read);
  }
  CHECK(mem.array_state()->set_mult == before_mult);
  CHECK(mem.array_state()->drift_exp == before_drift);
}

TEST_CASE("snapshot round trip replays identically across backends") {
  Rng rng(17);
  std::vector<BipolarVec> keys;
  std::vector<int> labels;
  for (int i = 0; i < 6; ++i) {
    keys.push_back(random_bipolar(128, rng));
    labels.push_back(i % 3);
  }
  KeyValueMemory exact(exact_opts(VecMode::kBipolar));
  exact.write_support(keys, labels, 3);
  std::stringstream snap;
  exact.save_snapshot(snap);

  // Reload into a zero-noise pcm memory; predictions must match the exact
  // backend on every probe.
  Rng prog(18);
  KeyValueMemory pcm(pcm_opts(VecMode::kBipolar, PcmDeviceParams::zero_noise(), false));
  pcm.load_snapshot(snap, &prog);
  CHECK(pcm.rows() == 6);
  CHECK(pcm.labels() == labels);
  SharpeningSpec abs_spec{Sharpening::kAbsolute, 10.0};
  Rng read(19);
  for (int t = 0; t < 20; ++t) {
    BipolarVec q = random_bipolar(128, rng);
    CHECK(exact.query(q, abs_spec, false, RankCriterion::kSumArgmax).predicted ==
          pcm.query(q, abs_spec, false, RankCriterion::kSumArgmax, &read).predicted);
  }

  // mode mismatch rejected
  std::stringstream snap2;
  exact.save_snapshot(snap2);
  KeyValueMemory wrong(exact_opts(VecMode::kBinary));
  CHECK_THROWS_AS(wrong.load_snapshot(snap2), ValidationError);
}
