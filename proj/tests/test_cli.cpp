#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mintime/csv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CLI_BIN_PATH) + " " + args +
                          " > /dev/null 2> /dev/null";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mintime_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("reach writes tube and summary") {
  const fs::path out = fresh_dir("reach");
  REQUIRE(run_cli("reach --example ex-counter --out " + out.string()) == 0);
  const std::string tube = slurp(out / "tube.csv");
  CHECK(tube.rfind("j,t_j,k,l1,l2,h_k,y1,y2\n", 0) == 0);
  const json summary = json::parse(slurp(out / "reach_summary.json"));
  CHECK(summary.at("expansion_violations").size() == 40);
  CHECK(summary.at("monotone_inclusion").get<bool>());
  CHECK(summary.at("config").at("example") == "ex-counter");
}

TEST_CASE("identical configs give byte-identical artifacts") {
  const fs::path out1 = fresh_dir("repro1");
  const fs::path out2 = fresh_dir("repro2");
  const std::string args = "mtf --example ex1-ball-ball --nr 60 --dx 0.1 --out ";
  REQUIRE(run_cli(args + out1.string()) == 0);
  REQUIRE(run_cli(args + out2.string()) == 0);
  CHECK(slurp(out1 / "field.csv") == slurp(out2 / "field.csv"));
}

TEST_CASE("summary embeds a config that reproduces the run") {
  const fs::path out1 = fresh_dir("roundtrip1");
  REQUIRE(run_cli("mtf --example ex3a --nr 40 --k 5 --dx 0.2 --out " +
                  out1.string()) == 0);
  const json summary = json::parse(slurp(out1 / "mtf_summary.json"));

  const fs::path cfg_path = out1 / "rerun_config.json";
  {
    std::ofstream cfg(cfg_path);
    json rerun = summary.at("config");
    rerun.erase("example");  // force the inline problem path
    cfg << rerun.dump();
  }
  const fs::path out2 = fresh_dir("roundtrip2");
  REQUIRE(run_cli("mtf --config " + cfg_path.string() + " --out " +
                  out2.string()) == 0);
  CHECK(slurp(out1 / "field.csv") == slurp(out2 / "field.csv"));
}

TEST_CASE("study needs a ladder") {
  const fs::path out = fresh_dir("study");
  CHECK(run_cli("study --example ex3a --out " + out.string()) == 2);

  const fs::path ladder = out / "ladder.json";
  {
    std::ofstream lf(ladder);
    lf << R"([{"h":0.05,"nr":50},{"h":0.025,"nr":50}])";
  }
  REQUIRE(run_cli("study --example ex3a --scheme heun-trapezoid --ladder " +
                  ladder.string() + " --out " + out.string()) == 0);
  const std::string csv = slurp(out / "study.csv");
  CHECK(csv.rfind("h,N_R,linf,compared,mismatches\n", 0) == 0);
  CHECK(csv.find("# fit C=") != std::string::npos);
}

TEST_CASE("trajectory command and the not-reachable exit code") {
  const fs::path out = fresh_dir("traj");
  REQUIRE(run_cli("traj --example ex1-ball-ball --start 0.5 0.4 --out " +
                  out.string()) == 0);
  const std::string csv = slurp(out / "trajectory.csv");
  CHECK(csv.rfind("t,x1,x2,u1,u2\n", 0) == 0);
  const json summary = json::parse(slurp(out / "traj_summary.json"));
  CHECK(summary.at("duration").get<double>() > 0.0);

  // Start inside the target: empty trajectory, still success.
  REQUIRE(run_cli("traj --example ex1-ball-ball --start 0.1 0.0 --out " +
                  out.string()) == 0);

  CHECK(run_cli("traj --example ex1-ball-ball --start 5 5 --out " +
                out.string()) == 4);
}

TEST_CASE("diagnostics") {
  const fs::path out = fresh_dir("diag");
  REQUIRE(run_cli("diag --example ex-counter --threshold 1e-3 --out " +
                  out.string()) == 0);
  const json diag = json::parse(slurp(out / "diag.json"));
  CHECK(diag.at("kalman_rank") == 1);
  CHECK(!diag.at("expansion_violations").empty());
}

TEST_CASE("config errors exit with code 2") {
  CHECK(run_cli("reach --example no-such-example") == 2);
  CHECK(run_cli("reach") == 2);
  CHECK(run_cli("mtf --example ex1-ball-ball --mode interpolated --no-monotone") ==
        2);
  CHECK(run_cli("reach --example ex1-ball-ball --nr 2") == 2);
}

TEST_CASE("float formatting is stable at 17 significant digits") {
  CHECK(mintime::fmt17(0.1) == "0.10000000000000001");
  CHECK(mintime::fmt17(1.0) == "1");
  CHECK(mintime::fmt17(std::numeric_limits<double>::infinity()) == "inf");
}
