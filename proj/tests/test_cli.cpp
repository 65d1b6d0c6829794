#include "iwri/cli.hpp"
#include "iwri/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

using namespace iwri;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig = R"(# 300 m x 200 m box study
grid.nx = 30
grid.nz = 20
box.x0 = 120
box.z0 = 80
box.side = 40
sources = 10 100
receivers.line = 280 20 280 180 5
frequencies = 4, 6
k_max = 3
pml.layers = 4
)";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "iwri");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path workdir() {
  const fs::path dir = fs::temp_directory_path() / "iwri_test_cli";
  fs::create_directories(dir);
  write_file((dir / "small.cfg").string(), kSmallConfig);
  return dir;
}

}  // namespace

TEST_CASE("forward writes a dataset") {
  const auto dir = workdir();
  const auto r = run({"forward", "--config", (dir / "small.cfg").string(), "--out", (dir / "fwd").string()});
  CHECK(r.code == kExitOk);
  CHECK(fs::exists(dir / "fwd" / "data.iwd"));
  CHECK(fs::exists(dir / "fwd" / "true_model.iwm"));
  CHECK(fs::exists(dir / "fwd" / "metadata.txt"));
}

TEST_CASE("WRI and IR-WRI produce different models") {
  const auto dir = workdir();
  const std::string cfg = (dir / "small.cfg").string();
  CHECK(run({"invert", "--config", cfg, "--variant", "wri", "--out", (dir / "wri").string()}).code == kExitOk);
  CHECK(run({"invert", "--config", cfg, "--variant", "irwri", "--out", (dir / "ir").string()}).code == kExitOk);
  const auto a = read_model_file((dir / "wri" / "final_model.iwm").string());
  const auto b = read_model_file((dir / "ir" / "final_model.iwm").string());
  CHECK((a.values - b.values).norm() > 0.0);
  const auto rec = read_convergence_csv((dir / "ir" / "convergence_path0_batch0.csv").string());
  CHECK(rec.rows.size() == 3);
  const std::string meta = read_file((dir / "ir" / "metadata.txt").string());
  CHECK(meta.find("path0.batch0.f4.mu1 = ") != std::string::npos);
  CHECK(meta.find("variant = prsm") != std::string::npos);
}

TEST_CASE("invert is reproducible across thread counts") {
  const auto dir = workdir();
  const std::string cfg = (dir / "small.cfg").string();
  ::setenv("IWRI_THREADS", "1", 1);
  CHECK(run({"invert", "--config", cfg, "--snr-db", "10", "--out", (dir / "t1").string()}).code == kExitOk);
  ::setenv("IWRI_THREADS", "3", 1);
  CHECK(run({"invert", "--config", cfg, "--snr-db", "10", "--out", (dir / "t3").string()}).code == kExitOk);
  ::unsetenv("IWRI_THREADS");
  for (const char* f : {"final_model.iwm", "convergence_path0_batch0.csv", "metadata.txt"}) {
    CHECK(read_file((dir / "t1" / f).string()) == read_file((dir / "t3" / f).string()));
  }
}

TEST_CASE("mu1 with a dense check") {
  const auto dir = workdir();
  write_file((dir / "tiny.cfg").string(),
             "grid.nx = 10\ngrid.nz = 8\nsources = 10 10\nreceivers.line = 80 10 80 60 3\npml.layers = 1\n"
             "true_model = homogeneous\n");
  const auto r = run({"mu1", "--config", (dir / "tiny.cfg").string(), "--freq", "7", "--dense-check"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("mu1 = ") != std::string::npos);
  const auto pos = r.out.find("relative_difference = ");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(r.out.substr(pos + 22)) < 1e-6);
}

TEST_CASE("oracle-refine") {
  const auto r = run({"oracle-refine", "--n", "12", "--beta", "0.5", "--k", "5"});
  CHECK(r.code == kExitOk);
  const auto pos = r.out.find("form_difference = ");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(r.out.substr(pos + 18)) < 1e-12);
}

TEST_CASE("usage and configuration errors exit with 1") {
  const auto dir = workdir();
  write_file((dir / "bad.cfg").string(), "grid.nx = 10\nno_such_key = 1\n");
  CHECK(run({}).code == kExitConfig);
  CHECK(run({"transmogrify"}).code == kExitConfig);
  CHECK(run({"invert", "--config", (dir / "missing.cfg").string()}).code == kExitConfig);
  CHECK(run({"invert", "--config", (dir / "bad.cfg").string()}).code == kExitConfig);
  CHECK(run({"invert", "--config", (dir / "small.cfg").string(), "--variant", "fwi"}).code == kExitConfig);
  CHECK(run({"invert", "--config", (dir / "small.cfg").string(), "--alpha", "2"}).code == kExitConfig);
}
