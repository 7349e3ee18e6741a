#include <bidride/bidride.h>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum Exit : int {
  kOk = 0,
  kIo = 1,
  kUsage = 2,
  kRefused = 3,
  kAbort = 4,
  kExists = 5,
};

int exit_for(bidride_status s) {
  switch (s) {
    case BIDRIDE_OK: return kOk;
    case BIDRIDE_E_IO: return kIo;
    case BIDRIDE_E_ARGUMENT:
    case BIDRIDE_E_PARSE:
    case BIDRIDE_E_PARAMETER: return kUsage;
    case BIDRIDE_E_REFUSED: return kRefused;
    case BIDRIDE_E_EXISTS: return kExists;
    default: return kAbort;
  }
}

int fail(bidride_status s, const std::string& context) {
  std::cerr << "bidride: " << context << ": " << bidride_last_error() << "\n";
  return exit_for(s);
}

std::string default_out() {
  if (const char* env = std::getenv("BIDRIDE_OUT_DIR"); env && *env) return env;
  return "out";
}

void emit(const char* text, size_t len) { std::fwrite(text, 1, len, stdout); }

struct RunArgs {
  std::string scenario;
  std::optional<uint64_t> seed;
  std::string out;
  bool force = false;
  std::string mode = "mechanism";
};

struct VerifyArgs {
  std::string instance;
};

struct CompareArgs {
  std::string scenario;
  std::string seeds;
  int threads = 0;
  std::string out;
  bool force = false;
};

int cmd_run(const RunArgs& a) {
  bidride_scenario* sc = nullptr;
  if (auto s = bidride_scenario_load(a.scenario.c_str(), &sc); s != BIDRIDE_OK)
    return fail(s, a.scenario);
  if (a.seed) bidride_scenario_set_seed(sc, *a.seed);
  const bidride_mode mode = a.mode == "baseline" ? BIDRIDE_MODE_BASELINE : BIDRIDE_MODE_MECHANISM;

  bidride_run* run = nullptr;
  auto s = bidride_simulate(sc, mode, &run);
  bidride_scenario_free(sc);
  if (s != BIDRIDE_OK) return fail(s, "run");

  const std::string out = a.out.empty() ? default_out() : a.out;
  s = bidride_run_write(run, out.c_str(), a.force ? 1 : 0);
  if (s != BIDRIDE_OK) {
    bidride_run_free(run);
    return fail(s, "write");
  }

  int code = kOk;
  if (!bidride_run_ok(run)) {
    uint64_t seed = 0;
    int64_t tick = 0;
    const char* msg = "";
    bidride_run_failure(run, &seed, &tick, &msg);
    std::cerr << "bidride: run aborted (seed " << seed << ", tick " << tick << "): " << msg
              << "\n";
    code = kAbort;
  } else {
    int64_t events = 0, auctions = 0, rides = 0;
    bidride_run_counts(run, &events, &auctions, &rides);
    std::cerr << "bidride: " << events << " events, " << auctions << " auctions, " << rides
              << " rides -> " << out << "\n";
  }
  bidride_run_free(run);
  return code;
}

int cmd_verify(const VerifyArgs& a) {
  bidride_instance* inst = nullptr;
  if (auto s = bidride_instance_load(a.instance.c_str(), &inst); s != BIDRIDE_OK)
    return fail(s, a.instance);
  bidride_verification* v = nullptr;
  auto s = bidride_verify(inst, &v);
  bidride_instance_free(inst);
  if (s != BIDRIDE_OK) return fail(s, "verify");
  const char* text = nullptr;
  size_t len = 0;
  bidride_verification_json(v, &text, &len);
  emit(text, len);
  bidride_verification_free(v);
  return kOk;
}

bool parse_u64(const std::string& s, uint64_t& out) {
  if (s.empty() || s.size() > 20) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  try {
    size_t pos = 0;
    out = std::stoull(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

int cmd_compare(const CompareArgs& a) {
  uint64_t first = 0, last = 0;
  const auto dots = a.seeds.find("..");
  const bool ok = dots == std::string::npos
                      ? parse_u64(a.seeds, first) && (last = first, true)
                      : parse_u64(a.seeds.substr(0, dots), first) &&
                            parse_u64(a.seeds.substr(dots + 2), last);
  if (!ok) {
    std::cerr << "bidride: --seeds expects A..B or a single seed, got '" << a.seeds << "'\n";
    return kUsage;
  }
  if (last < first) {
    std::cerr << "bidride: seed range " << a.seeds << " is empty\n";
    return kUsage;
  }

  bidride_scenario* sc = nullptr;
  if (auto s = bidride_scenario_load(a.scenario.c_str(), &sc); s != BIDRIDE_OK)
    return fail(s, a.scenario);
  bidride_comparison* cmp = nullptr;
  auto s = bidride_compare(sc, first, last, a.threads, &cmp);
  bidride_scenario_free(sc);
  if (s != BIDRIDE_OK) return fail(s, "compare");

  const std::string out = a.out.empty() ? default_out() : a.out;
  s = bidride_comparison_write(cmp, out.c_str(), a.force ? 1 : 0);
  if (s != BIDRIDE_OK) {
    bidride_comparison_free(cmp);
    return fail(s, "write");
  }
  const char* text = nullptr;
  size_t len = 0;
  bidride_comparison_csv(cmp, &text, &len);
  emit(text, len);
  bidride_comparison_summary(cmp, &text, &len);
  std::cerr.write(text, static_cast<std::streamsize>(len));
  bidride_comparison_free(cmp);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sealed-bid ride marketplace simulator and mechanism verifier"};
  app.set_version_flag("--version", bidride_version());
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 ok, 1 i/o error, 2 malformed input or usage, 3 refused (instance too "
      "large),\n4 invariant abort, 5 output exists (use --force).\nBIDRIDE_OUT_DIR sets the "
      "default output directory (otherwise ./out).");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write report, metrics and event log");
  run_cmd->add_option("scenario", run.scenario, "Scenario file")->required();
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_flag("--force", run.force, "Overwrite existing output files");
  run_cmd->add_option("--mode", run.mode, "mechanism or baseline")
      ->check(CLI::IsMember({"mechanism", "baseline"}));

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Check mechanism properties on a small instance");
  verify_cmd->add_option("instance", verify.instance, "Instance file")->required();

  CompareArgs compare;
  auto* compare_cmd =
      app.add_subcommand("compare", "Paired mechanism vs fixed-price runs over a seed range");
  compare_cmd->add_option("scenario", compare.scenario, "Scenario file")->required();
  compare_cmd->add_option("--seeds", compare.seeds, "Seed range A..B (inclusive)")->required();
  compare_cmd->add_option("--threads", compare.threads, "Worker threads (0 = hardware)")
      ->check(CLI::NonNegativeNumber);
  compare_cmd->add_option("--out", compare.out, "Output directory");
  compare_cmd->add_flag("--force", compare.force, "Overwrite existing output files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "bidride: " << e.what() << "\n";
    return kUsage;
  }

  if (*run_cmd) return cmd_run(run);
  if (*verify_cmd) return cmd_verify(verify);
  return cmd_compare(compare);
}
