#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch() {
  static const fs::path dir = [] {
    const fs::path p = fs::temp_directory_path() / "bidride_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

Result cli(const std::string& args) {
  const fs::path out = scratch() / "stdout.txt";
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd = "cd '" + std::string(BIDRIDE_SOURCE_DIR) + "' && '" + BIDRIDE_CLI + "' " +
                          args + " > '" + out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string out_dir(const std::string& name) {
  const fs::path p = scratch() / name;
  fs::remove_all(p);
  return p.string();
}

}  // namespace

TEST_CASE("help and version") {
  CHECK(cli("--help").code == 0);
  CHECK(cli("--version").code == 0);
  CHECK(cli("").code == 2);
  CHECK(cli("frobnicate").code == 2);
}

TEST_CASE("run writes outputs and refuses to overwrite") {
  const std::string dir = out_dir("run");
  const Result a = cli("run scenarios/t2_only.json --out '" + dir + "'");
  CHECK(a.code == 0);
  CHECK(fs::exists(fs::path(dir) / "report.json"));
  CHECK(fs::exists(fs::path(dir) / "metrics.csv"));
  CHECK(fs::exists(fs::path(dir) / "events.log"));
  const std::string log = slurp(fs::path(dir) / "events.log");
  const std::string report = slurp(fs::path(dir) / "report.json");
  const std::string metrics = slurp(fs::path(dir) / "metrics.csv");

  const Result again = cli("run scenarios/t2_only.json --out '" + dir + "'");
  CHECK(again.code == 5);

  const Result forced = cli("run scenarios/t2_only.json --out '" + dir + "' --force");
  CHECK(forced.code == 0);
  CHECK(slurp(fs::path(dir) / "events.log") == log);
  CHECK(slurp(fs::path(dir) / "report.json") == report);
  CHECK(slurp(fs::path(dir) / "metrics.csv") == metrics);
  CHECK(a.out == forced.out);
}

TEST_CASE("seed override and baseline mode") {
  const std::string d1 = out_dir("seed1");
  const std::string d2 = out_dir("seed2");
  REQUIRE(cli("run scenarios/t2_only.json --seed 1 --out '" + d1 + "'").code == 0);
  REQUIRE(cli("run scenarios/t2_only.json --seed 2 --mode baseline --out '" + d2 + "'").code == 0);
  CHECK(slurp(fs::path(d1) / "events.log") != slurp(fs::path(d2) / "events.log"));
  CHECK(cli("run scenarios/t2_only.json --mode sideways --out '" + out_dir("bad") + "'").code == 2);
}

TEST_CASE("invalid scenarios exit 2 with a message") {
  const Result r = cli("run scenarios/invalid/max_selected_20.json --out '" + out_dir("inv") + "'");
  CHECK(r.code == 2);
  CHECK(r.err.find("max_selected exceeds 15") != std::string::npos);
  CHECK(cli("run scenarios/invalid/malformed.json --out '" + out_dir("inv2") + "'").code == 2);
  const Result u = cli("run scenarios/invalid/unknown_field.json --out '" + out_dir("inv3") + "'");
  CHECK(u.code == 2);
  CHECK(u.err.find("demand.arrival_rate") != std::string::npos);
  CHECK(cli("run scenarios/missing.json --out '" + out_dir("inv4") + "'").code == 1);
}

TEST_CASE("verify") {
  const Result ok = cli("verify scenarios/instances/multistable_t2.json");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("fixed_points") != std::string::npos);
  CHECK(cli("verify scenarios/instances/multistable_t2.json").out == ok.out);
  const Result big = cli("verify scenarios/instances/oversized.json");
  CHECK(big.code == 3);
  CHECK(big.err.size() > 0);
  CHECK(cli("verify scenarios/instances/malformed.json").code == 2);
}

TEST_CASE("compare") {
  const std::string dir = out_dir("cmp");
  const Result r = cli("compare scenarios/t2_only.json --seeds 1..3 --threads 2 --out '" + dir + "'");
  CHECK(r.code == 0);
  CHECK(fs::exists(fs::path(dir) / "compare.csv"));
  CHECK(fs::exists(fs::path(dir) / "summary.json"));
  CHECK(slurp(fs::path(dir) / "compare.csv") == r.out);
  const Result single = cli("compare scenarios/t2_only.json --seeds 4 --out '" + out_dir("cmp1") + "'");
  CHECK(single.code == 0);
  CHECK(single.err.find("null") != std::string::npos);
  CHECK(cli("compare scenarios/t2_only.json --seeds 5..4 --out '" + out_dir("cmp2") + "'").code == 2);
  CHECK(cli("compare scenarios/t2_only.json --seeds x --out '" + out_dir("cmp3") + "'").code == 2);
}
