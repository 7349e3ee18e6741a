#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bidride/bidride.h>

#include <filesystem>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string path(const std::string& rel) { return std::string(BIDRIDE_SOURCE_DIR) + "/" + rel; }

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bidride_capi_" + name);
  fs::remove_all(p);
  return p;
}

std::string text_of(bidride_status (*get)(const bidride_run*, const char**, size_t*),
                    const bidride_run* r) {
  const char* t = nullptr;
  size_t n = 0;
  REQUIRE(get(r, &t, &n) == BIDRIDE_OK);
  return std::string(t, n);
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(bidride_version()).size() > 0);
  CHECK(std::string(bidride_status_name(BIDRIDE_OK)) == "ok");
  CHECK(std::string(bidride_status_name(BIDRIDE_E_REFUSED)) == "refused");
}

TEST_CASE("null arguments are rejected") {
  bidride_scenario* s = nullptr;
  CHECK(bidride_scenario_load(nullptr, &s) == BIDRIDE_E_ARGUMENT);
  CHECK(bidride_scenario_load(path("scenarios/default.json").c_str(), nullptr) == BIDRIDE_E_ARGUMENT);
  CHECK(bidride_simulate(nullptr, BIDRIDE_MODE_MECHANISM, nullptr) == BIDRIDE_E_ARGUMENT);
  CHECK(std::string(bidride_last_error()).size() > 0);
  bidride_scenario_free(nullptr);
  bidride_run_free(nullptr);
  bidride_instance_free(nullptr);
  bidride_verification_free(nullptr);
  bidride_comparison_free(nullptr);
}

TEST_CASE("scenario errors map to status codes") {
  bidride_scenario* s = nullptr;
  CHECK(bidride_scenario_load(path("scenarios/invalid/malformed.json").c_str(), &s) == BIDRIDE_E_PARSE);
  CHECK(s == nullptr);
  CHECK(bidride_scenario_load(path("scenarios/invalid/max_selected_20.json").c_str(), &s) ==
        BIDRIDE_E_PARAMETER);
  CHECK(std::string(bidride_last_error()).find("max_selected exceeds 15") != std::string::npos);
  CHECK(bidride_scenario_load("/nonexistent/scenario.json", &s) == BIDRIDE_E_IO);
  const std::string bad = "{\"seed\": 1, \"bogus\": 2}";
  CHECK(bidride_scenario_parse(bad.data(), bad.size(), &s) == BIDRIDE_E_PARSE);
}

TEST_CASE("run through the C API") {
  bidride_scenario* s = nullptr;
  REQUIRE(bidride_scenario_load(path("scenarios/t2_only.json").c_str(), &s) == BIDRIDE_OK);
  uint64_t seed = 0;
  CHECK(bidride_scenario_seed(s, &seed) == BIDRIDE_OK);
  CHECK(seed == 7);
  bidride_run* a = nullptr;
  bidride_run* b = nullptr;
  REQUIRE(bidride_simulate(s, BIDRIDE_MODE_MECHANISM, &a) == BIDRIDE_OK);
  REQUIRE(bidride_simulate(s, BIDRIDE_MODE_MECHANISM, &b) == BIDRIDE_OK);
  CHECK(bidride_run_ok(a) == 1);
  CHECK(text_of(bidride_run_event_log, a) == text_of(bidride_run_event_log, b));
  CHECK(text_of(bidride_run_report, a) == text_of(bidride_run_report, b));
  CHECK(text_of(bidride_run_metrics_csv, a).find("total") != std::string::npos);
  int64_t events = 0, auctions = 0, rides = 0;
  CHECK(bidride_run_counts(a, &events, &auctions, &rides) == BIDRIDE_OK);
  CHECK(events > 0);
  CHECK(auctions >= rides);
  size_t violations = 99;
  CHECK(bidride_run_privacy_violations(a, &violations) == BIDRIDE_OK);
  CHECK(violations == 0);

  const fs::path dir = fresh_dir("run");
  CHECK(bidride_run_write(a, dir.c_str(), 0) == BIDRIDE_OK);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "metrics.csv"));
  CHECK(fs::exists(dir / "events.log"));
  CHECK(bidride_run_write(a, dir.c_str(), 0) == BIDRIDE_E_EXISTS);
  CHECK(bidride_run_write(a, dir.c_str(), 1) == BIDRIDE_OK);
  fs::remove_all(dir);

  bidride_run* base = nullptr;
  REQUIRE(bidride_simulate(s, BIDRIDE_MODE_BASELINE, &base) == BIDRIDE_OK);
  CHECK(text_of(bidride_run_event_log, base) != text_of(bidride_run_event_log, a));
  CHECK(bidride_simulate(s, static_cast<bidride_mode>(7), &b) == BIDRIDE_E_ARGUMENT);

  CHECK(bidride_scenario_set_seed(s, 8) == BIDRIDE_OK);
  bidride_run* c = nullptr;
  REQUIRE(bidride_simulate(s, BIDRIDE_MODE_MECHANISM, &c) == BIDRIDE_OK);
  CHECK(text_of(bidride_run_event_log, c) != text_of(bidride_run_event_log, a));
  bidride_run_free(a);
  bidride_run_free(b);
  bidride_run_free(c);
  bidride_run_free(base);
  bidride_scenario_free(s);
}

TEST_CASE("verification through the C API") {
  bidride_instance* inst = nullptr;
  REQUIRE(bidride_instance_load(path("scenarios/instances/multistable_t2.json").c_str(), &inst) ==
          BIDRIDE_OK);
  bidride_verification* v = nullptr;
  REQUIRE(bidride_verify(inst, &v) == BIDRIDE_OK);
  size_t fps = 0, nash = 0;
  CHECK(bidride_verification_fixed_points(v, &fps, &nash) == BIDRIDE_OK);
  CHECK(fps >= 2);
  CHECK(nash >= fps);
  const char* t = nullptr;
  size_t n = 0;
  CHECK(bidride_verification_json(v, &t, &n) == BIDRIDE_OK);
  CHECK(std::string(t, n).find("fixed_points") != std::string::npos);
  bidride_verification_free(v);
  bidride_instance_free(inst);

  REQUIRE(bidride_instance_load(path("scenarios/instances/oversized.json").c_str(), &inst) == BIDRIDE_OK);
  CHECK(bidride_verify(inst, &v) == BIDRIDE_E_REFUSED);
  bidride_instance_free(inst);
  CHECK(bidride_instance_load(path("scenarios/instances/malformed.json").c_str(), &inst) ==
        BIDRIDE_E_PARSE);
}

TEST_CASE("comparison through the C API") {
  bidride_scenario* s = nullptr;
  REQUIRE(bidride_scenario_load(path("scenarios/t2_only.json").c_str(), &s) == BIDRIDE_OK);
  bidride_comparison* c = nullptr;
  CHECK(bidride_compare(s, 5, 4, 1, &c) == BIDRIDE_E_PARAMETER);
  REQUIRE(bidride_compare(s, 1, 3, 2, &c) == BIDRIDE_OK);
  size_t rows = 0;
  CHECK(bidride_comparison_rows(c, &rows) == BIDRIDE_OK);
  CHECK(rows == 3);
  const fs::path dir = fresh_dir("compare");
  CHECK(bidride_comparison_write(c, dir.c_str(), 0) == BIDRIDE_OK);
  CHECK(fs::exists(dir / "compare.csv"));
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(bidride_comparison_write(c, dir.c_str(), 0) == BIDRIDE_E_EXISTS);
  fs::remove_all(dir);
  bidride_comparison_free(c);
  bidride_scenario_free(s);
}

TEST_CASE("clearing price primitive") {
  int64_t price = 0;
  int branch = -1, feasible = -1;
  CHECK(bidride_clearing_price(2, 1000, 900, 500, 1000, &price, &branch, &feasible) == BIDRIDE_OK);
  CHECK(feasible == 1);
  CHECK(price == 900);
  CHECK(branch == 2);
  CHECK(bidride_clearing_price(9, 1000, 900, 500, 1000, &price, &branch, &feasible) == BIDRIDE_E_ARGUMENT);
}
