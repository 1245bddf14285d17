// End-to-end drive of the installed CLI binary (path passed as argv[1]).
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void expect(bool ok, const std::string& what) {
  if (ok) {
    std::cout << "[ok] " << what << "\n";
  } else {
    std::cout << "[FAILED] " << what << "\n";
    ++g_failures;
  }
}

int run(const std::string& cmd) {
  int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

bool tree_equal(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> fa, fb;
  for (auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a));
  for (auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b));
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  if (fa != fb) return false;
  for (const auto& rel : fa)
    if (slurp(a / rel) != slurp(b / rel)) return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: hdmann_cli_tests <path-to-hdmann-binary>\n";
    return 2;
  }
  std::string cli = argv[1];
  fs::path tmp = fs::temp_directory_path() / "hdmann_cli_test";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  // usage errors exit with 2
  expect(run(cli + " > /dev/null 2>&1") == 2, "no subcommand -> usage exit 2");
  expect(run(cli + " train > /dev/null 2>&1") == 2, "train without --dataset -> usage exit 2");

  // gen-data: deterministic trees for the same seed
  std::string d1 = (tmp / "data1").string(), d2 = (tmp / "data2").string(),
              d3 = (tmp / "data3").string();
  expect(run(cli + " gen-data --classes 40 --samples 6 --seed 7 --image-size 16 --out " + d1 +
             " > /dev/null") == 0,
         "gen-data succeeds");
  expect(run(cli + " gen-data --classes 40 --samples 6 --seed 7 --image-size 16 --out " + d2 +
             " > /dev/null") == 0,
         "gen-data second run succeeds");
  expect(run(cli + " gen-data --classes 40 --samples 6 --seed 8 --image-size 16 --out " + d3 +
             " > /dev/null") == 0,
         "gen-data third run succeeds");
  expect(tree_equal(d1, d2), "same seed -> byte-identical dataset tree");
  expect(!tree_equal(d1, d3), "different seed -> different dataset");
  expect(run(cli + " gen-data --classes 0 --samples 5 --out " + (tmp / "bad").string() +
             " > /dev/null 2>&1") == 3,
         "invalid --classes -> validation exit 3");

  // train a tiny model
  std::string run1 = (tmp / "run1").string();
  std::string train_flags = " train --dataset " + d1 +
                            " --problem 3x1 --sharpening softabs --episodes 8 --val-interval 4"
                            " --val-episodes 2 --batch 4 --dim 16 --arch conv:4x3,pool,conv:4x3"
                            " --seed 1 --out ";
  expect(run(cli + train_flags + run1 + " > /dev/null") == 0, "train succeeds");
  expect(fs::exists(fs::path(run1) / "checkpoint.bin"), "checkpoint written");
  {
    std::ifstream is(fs::path(run1) / "training_log.csv");
    int rows = 0;
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line))
      if (!line.empty()) ++rows;
    expect(rows == 8, "training log has one row per episode");
  }

  // idempotent outputs for identical config+seed
  std::string run2 = (tmp / "run2").string();
  expect(run(cli + train_flags + run2 + " > /dev/null") == 0, "train rerun succeeds");
  expect(slurp(fs::path(run1) / "checkpoint.bin") == slurp(fs::path(run2) / "checkpoint.bin"),
         "same seed -> byte-identical checkpoint");
  expect(slurp(fs::path(run1) / "training_log.csv") == slurp(fs::path(run2) / "training_log.csv"),
         "same seed -> byte-identical log");

  // eval: exact vs zero-noise pcm agree
  std::string ckpt = (fs::path(run1) / "checkpoint.bin").string();
  std::string eval_dir = (tmp / "eval_exact").string();
  std::string eval_common = " --dataset " + d1 + " --checkpoint " + ckpt +
                            " --problem 3x1 --batch 4 --dim 16 --episodes 8 --seed 2 --out ";
  expect(run(cli + " eval --mode bipolar --backend exact" + eval_common + eval_dir +
             " > /dev/null") == 0,
         "eval exact succeeds");
  std::string eval_dir2 = (tmp / "eval_pcm").string();
  expect(run(cli + " eval --mode bipolar --backend pcm --pcm-profile zero-noise --set "
                   "adc_quantize=off" +
             eval_common + eval_dir2 + " > /dev/null") == 0,
         "eval zero-noise pcm succeeds");
  {
    std::string a = slurp(fs::path(eval_dir) / "eval_report.json");
    std::string b = slurp(fs::path(eval_dir2) / "eval_report.json");
    auto grab = [](const std::string& s) -> std::string {
      auto pos = s.find("mean_accuracy");
      if (pos == std::string::npos) return {};
      return s.substr(pos, s.find('\n', pos) - pos);
    };
    expect(!a.empty() && !b.empty(), "eval reports written");
    expect(grab(a) == grab(b), "zero-noise pcm accuracy equals exact backend");
  }

  // checkpoint/config dim mismatch -> validation error
  expect(run(cli + " eval --mode real --backend exact --dataset " + d1 + " --checkpoint " + ckpt +
             " --problem 3x1 --dim 64 --episodes 2 --out " + (tmp / "eval_bad").string() +
             " > /dev/null 2>&1") == 3,
         "dim mismatch -> validation exit 3");

  // sigma-lambda sweep + report
  std::string sweep_dir = (tmp / "sweep").string();
  expect(run(cli + " sweep sigma-lambda --alphas 0.5 --dims 128,512 --sigmas 0.317 --trials 2000"
                   " --seed 3 --out " +
             sweep_dir + " > /dev/null") == 0,
         "sigma-lambda sweep succeeds");
  expect(fs::exists(fs::path(sweep_dir) / "sigma_lambda.csv"), "sweep csv written");
  std::string report_out = (tmp / "summary.txt").string();
  expect(run(cli + " report " + (fs::path(sweep_dir) / "sigma_lambda.json").string() + " --out " +
             report_out + " > /dev/null") == 0,
         "report render succeeds");
  expect(slurp(report_out).find("sweep-sigma-lambda") != std::string::npos,
         "report mentions the sweep kind");

  // HDMANN_OUT_DIR provides the default output directory
  {
    std::string env_dir = (tmp / "env_out").string();
    expect(run("HDMANN_OUT_DIR=" + env_dir + " " + cli +
               " sweep sigma-lambda --alphas 0.5 --dims 128 --sigmas 0.1 --trials 500 "
               "> /dev/null") == 0,
           "sweep with HDMANN_OUT_DIR succeeds");
    expect(fs::exists(fs::path(env_dir) / "sigma_lambda.csv"),
           "artifacts land in HDMANN_OUT_DIR");
  }

  // deterministic sweep output
  std::string sweep_dir2 = (tmp / "sweep2").string();
  expect(run(cli + " sweep sigma-lambda --alphas 0.5 --dims 128,512 --sigmas 0.317 --trials 2000"
                   " --seed 3 --out " +
             sweep_dir2 + " > /dev/null") == 0,
         "sweep rerun succeeds");
  expect(slurp(fs::path(sweep_dir) / "sigma_lambda.csv") ==
             slurp(fs::path(sweep_dir2) / "sigma_lambda.csv"),
         "same seed -> byte-identical sweep csv");

  fs::remove_all(tmp);
  if (g_failures > 0) {
    std::cout << g_failures << " cli check(s) failed\n";
    return 1;
  }
  std::cout << "all cli checks passed\n";
  return 0;
}
