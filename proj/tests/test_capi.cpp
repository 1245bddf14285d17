// Exercises the shared-library surface exactly as an external client would:
// through hdmann.h only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "hdmann.h"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("version and status names") {
  CHECK(hdm_version() != nullptr);
  CHECK(std::strcmp(hdm_status_name(HDM_OK), "ok") == 0);
  CHECK(std::strcmp(hdm_status_name(HDM_ERR_VALIDATION), "validation") == 0);
}

TEST_CASE("config set/get, schema rejection, last_error") {
  hdm_config* cfg = hdm_config_new();
  REQUIRE(cfg != nullptr);
  CHECK(hdm_config_set(cfg, "dim", "64") == HDM_OK);
  char buf[32];
  CHECK(hdm_config_get(cfg, "dim", buf, sizeof(buf)) == HDM_OK);
  CHECK(std::strcmp(buf, "64") == 0);

  CHECK(hdm_config_set(cfg, "no_such_key", "1") == HDM_ERR_VALIDATION);
  CHECK(std::string(hdm_last_error()).find("no_such_key") != std::string::npos);
  CHECK(hdm_config_set(cfg, "dim", "-3") == HDM_ERR_VALIDATION);
  CHECK(hdm_config_set(nullptr, "dim", "1") == HDM_ERR_INVALID_ARG);
  CHECK(hdm_config_load_file(cfg, "/nonexistent/config.cfg") == HDM_ERR_IO);
  hdm_config_free(cfg);
}

TEST_CASE("value helpers") {
  CHECK(hdm_softabs(0.0, 10.0) == doctest::Approx(0.013386).epsilon(1e-4));
  double out = 0.0;
  CHECK(hdm_sigma_lambda_theory(0.5, 512, 0.317, &out) == HDM_OK);
  CHECK(out == doctest::Approx(0.014010).epsilon(1e-4));
  CHECK(hdm_sigma_lambda_theory(-0.5, 512, 0.317, &out) == HDM_ERR_DOMAIN);

  double a[3] = {1, 0, 0}, b[3] = {0, 1, 0}, zero[3] = {0, 0, 0};
  double cosv = 1.0;
  CHECK(hdm_cosine_similarity(a, b, 3, &cosv) == HDM_OK);
  CHECK(cosv == doctest::Approx(0.0));
  CHECK(hdm_cosine_similarity(a, zero, 3, &cosv) == HDM_ERR_DOMAIN);
  CHECK(hdm_cosine_similarity(nullptr, b, 3, &cosv) == HDM_ERR_INVALID_ARG);
}

TEST_CASE("dataset generate/export/load/info") {
  TempDir tmp("hdmann_capi_dataset");
  hdm_config* cfg = hdm_config_new();
  CHECK(hdm_config_set(cfg, "classes", "12") == HDM_OK);
  CHECK(hdm_config_set(cfg, "samples", "5") == HDM_OK);
  CHECK(hdm_config_set(cfg, "image_size", "16") == HDM_OK);
  CHECK(hdm_config_set(cfg, "seed", "9") == HDM_OK);

  hdm_dataset* ds = nullptr;
  REQUIRE(hdm_dataset_generate(cfg, &ds) == HDM_OK);
  int classes = 0, samples = 0, size = 0;
  CHECK(hdm_dataset_info(ds, &classes, &samples, &size) == HDM_OK);
  CHECK(classes == 12);
  CHECK(samples == 5);
  CHECK(size == 16);

  CHECK(hdm_dataset_export(ds, tmp.file("data").c_str()) == HDM_OK);
  hdm_dataset* back = nullptr;
  REQUIRE(hdm_dataset_load(tmp.file("data").c_str(), &back) == HDM_OK);
  CHECK(hdm_dataset_info(back, &classes, &samples, &size) == HDM_OK);
  CHECK(classes == 12);
  hdm_dataset_free(back);
  hdm_dataset_free(ds);
  hdm_config_free(cfg);

  hdm_dataset* missing = nullptr;
  CHECK(hdm_dataset_load("/nonexistent/dir", &missing) == HDM_ERR_IO);
}

TEST_CASE("train, checkpoint, eval, sweeps, report round trip") {
  TempDir tmp("hdmann_capi_train");
  hdm_config* cfg = hdm_config_new();
  CHECK(hdm_config_set(cfg, "classes", "40") == HDM_OK);
  CHECK(hdm_config_set(cfg, "samples", "6") == HDM_OK);
  CHECK(hdm_config_set(cfg, "image_size", "16") == HDM_OK);
  CHECK(hdm_config_set(cfg, "arch", "conv:4x3,pool,conv:4x3") == HDM_OK);
  CHECK(hdm_config_set(cfg, "dim", "16") == HDM_OK);
  CHECK(hdm_config_set(cfg, "problem", "3x1") == HDM_OK);
  CHECK(hdm_config_set(cfg, "batch", "4") == HDM_OK);
  CHECK(hdm_config_set(cfg, "episodes", "10") == HDM_OK);
  CHECK(hdm_config_set(cfg, "val_interval", "5") == HDM_OK);
  CHECK(hdm_config_set(cfg, "val_episodes", "2") == HDM_OK);
  CHECK(hdm_config_set(cfg, "eval_episodes", "6") == HDM_OK);
  CHECK(hdm_config_set(cfg, "seed", "3") == HDM_OK);

  hdm_dataset* ds = nullptr;
  REQUIRE(hdm_dataset_generate(cfg, &ds) == HDM_OK);

  std::string ckpt = tmp.file("checkpoint.bin");
  std::string log = tmp.file("training_log.csv");
  double best = -1.0;
  REQUIRE(hdm_train(cfg, ds, ckpt.c_str(), log.c_str(), &best) == HDM_OK);
  CHECK(best >= 0.0);
  CHECK(fs::exists(ckpt));
  {
    std::ifstream is(log);
    std::string header;
    std::getline(is, header);
    CHECK(header == "episode,loss,train_acc,val_acc");
    int rows = 0;
    std::string line;
    while (std::getline(is, line))
      if (!line.empty()) ++rows;
    CHECK(rows == 10);  // one row per episode
  }

  hdm_checkpoint* cp = nullptr;
  REQUIRE(hdm_checkpoint_load(ckpt.c_str(), &cp) == HDM_OK);
  int d = 0, input = 0;
  long long pcount = 0;
  CHECK(hdm_checkpoint_info(cp, &d, &input, &pcount) == HDM_OK);
  CHECK(d == 16);
  CHECK(input == 16);
  CHECK(pcount > 0);

  std::string eval_json = tmp.file("eval.json");
  double mean = -1, stddev = -1;
  REQUIRE(hdm_eval(cfg, cp, ds, eval_json.c_str(), &mean, &stddev) == HDM_OK);
  CHECK(mean >= 0.0);
  CHECK(mean <= 1.0);
  CHECK(fs::exists(eval_json));

  // dim mismatch between checkpoint and config is a validation error
  CHECK(hdm_config_set(cfg, "dim", "32") == HDM_OK);
  CHECK(hdm_eval(cfg, cp, ds, nullptr, &mean, &stddev) == HDM_ERR_VALIDATION);
  CHECK(hdm_config_set(cfg, "dim", "16") == HDM_OK);

  // sigma-lambda sweep with a small grid
  CHECK(hdm_config_set(cfg, "alphas", "0.5") == HDM_OK);
  CHECK(hdm_config_set(cfg, "dims", "128") == HDM_OK);
  CHECK(hdm_config_set(cfg, "sigmas", "0.317") == HDM_OK);
  CHECK(hdm_config_set(cfg, "trials", "2000") == HDM_OK);
  std::string grid_csv = tmp.file("grid.csv"), grid_json = tmp.file("grid.json");
  REQUIRE(hdm_sweep_sigma_lambda(cfg, grid_csv.c_str(), grid_json.c_str()) == HDM_OK);
  CHECK(fs::exists(grid_csv));

  // noise sweep reusing the checkpoint
  CHECK(hdm_config_set(cfg, "levels", "0,0.317") == HDM_OK);
  CHECK(hdm_config_set(cfg, "eval_episodes", "4") == HDM_OK);
  std::string noise_csv = tmp.file("noise.csv"), noise_json = tmp.file("noise.json");
  REQUIRE(hdm_sweep_noise(cfg, cp, ds, noise_csv.c_str(), noise_json.c_str()) == HDM_OK);
  CHECK(fs::exists(noise_csv));

  // report rendering over the JSON artifacts
  const char* paths[3] = {eval_json.c_str(), grid_json.c_str(), noise_json.c_str()};
  std::string summary = tmp.file("summary.txt");
  REQUIRE(hdm_report_render(paths, 3, summary.c_str()) == HDM_OK);
  std::ifstream s(summary);
  std::string text((std::istreambuf_iterator<char>(s)), std::istreambuf_iterator<char>());
  CHECK(text.find("== eval") != std::string::npos);
  CHECK(text.find("== sweep-sigma-lambda") != std::string::npos);
  CHECK(text.find("== sweep-noise") != std::string::npos);

  hdm_checkpoint_free(cp);
  hdm_dataset_free(ds);
  hdm_config_free(cfg);
}

TEST_CASE("deterministic artifacts for a fixed seed") {
  TempDir tmp("hdmann_capi_determinism");
  hdm_config* cfg = hdm_config_new();
  CHECK(hdm_config_set(cfg, "alphas", "0.25") == HDM_OK);
  CHECK(hdm_config_set(cfg, "dims", "128") == HDM_OK);
  CHECK(hdm_config_set(cfg, "sigmas", "0.1") == HDM_OK);
  CHECK(hdm_config_set(cfg, "trials", "1000") == HDM_OK);
  std::string a = tmp.file("a.csv"), b = tmp.file("b.csv");
  REQUIRE(hdm_sweep_sigma_lambda(cfg, a.c_str(), nullptr) == HDM_OK);
  REQUIRE(hdm_sweep_sigma_lambda(cfg, b.c_str(), nullptr) == HDM_OK);
  std::ifstream fa(a), fb(b);
  std::string ta((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string tb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(ta == tb);
  CHECK(!ta.empty());
  hdm_config_free(cfg);
}
