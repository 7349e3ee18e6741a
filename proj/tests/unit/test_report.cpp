#include <doctest.h>

#include <filesystem>

#include "core/error.hpp"
#include "report/report.hpp"
#include "sim/scenario.hpp"

using namespace bidride;

namespace {

std::string scenario_path(const std::string& name) {
  return std::string(BIDRIDE_SOURCE_DIR) + "/scenarios/" + name;
}

Scenario quick(std::uint64_t seed) {
  Scenario s;
  s.seed = seed;
  s.duration = hours(1);
  s.fleet.drivers = 20;
  s.mechanism_mix = {0.2, 0.2, 0.2, 0.2, 0.2};
  return s;
}

std::string error_message(const std::string& path) {
  try {
    load_scenario(path);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("sample scenarios load") {
  for (const char* name : {"default.json", "t2_only.json", "cross_contingent.json"}) {
    CAPTURE(name);
    const Scenario s = load_scenario(scenario_path(name));
    CHECK_NOTHROW(s.validate());
    CHECK(scenario_digest(s).size() == 16);
    CHECK(scenario_digest(s) == scenario_digest(load_scenario(scenario_path(name))));
  }
  const Scenario d = load_scenario(scenario_path("default.json"));
  CHECK(d.seed == 42);
  Scenario other = d;
  other.seed = 43;
  CHECK(scenario_digest(other) != scenario_digest(d));
}

TEST_CASE("invalid scenarios name the problem") {
  CHECK(error_message(scenario_path("invalid/max_selected_20.json")).find("max_selected exceeds 15") !=
        std::string::npos);
  CHECK(error_message(scenario_path("invalid/unknown_field.json")).find("demand.arrival_rate") !=
        std::string::npos);
  CHECK(error_message(scenario_path("invalid/malformed.json")).find("line") != std::string::npos);
  CHECK_THROWS_AS(load_scenario(scenario_path("does_not_exist.json")), Error);
  CHECK_THROWS_AS(parse_scenario(R"({"duration_minutes": -5})"), Error);
  CHECK_THROWS_AS(parse_scenario(R"({"mechanism_mix": {"T1": 0.0, "T2": 0.0, "T3": 0.0, "T4": 0.0, "T5": 0.0}})"),
                  Error);
}

TEST_CASE("report and metrics round trip") {
  const RunResult r = run(quick(2));
  REQUIRE(r.ok());
  const RunReport rep = make_report(r);
  CHECK(rep.events == static_cast<std::int64_t>(r.log.size()));
  CHECK(rep.auctions == static_cast<std::int64_t>(r.auctions.size()));
  CHECK(rep.rides == static_cast<std::int64_t>(r.rides.size()));
  const std::string j = write_report(rep);
  CHECK(parse_report_json(j) == rep);
  CHECK(write_report(parse_report_json(j)) == j);
  const MetricsTable t = parse_metrics_csv(write_metrics_csv(rep));
  CHECK(t.metrics == rep.metrics);
  CHECK(t.totals == rep.totals);
  CHECK_THROWS_AS(parse_report_json("{}"), Error);
  CHECK_THROWS_AS(parse_metrics_csv("type,trades\nT9,1\n"), Error);
}

TEST_CASE("event log text round trip") {
  const RunResult r = run(quick(3));
  const std::string text = r.log.serialize();
  CHECK(EventLog::parse(text).serialize() == text);
  CHECK(EventLog::parse(text).events() == r.log.events());
}

TEST_CASE("compare rows are ordered and independent of threads") {
  const std::vector<std::uint64_t> seeds = {5, 3, 4};
  const CompareResult one = compare_seeds(quick(1), seeds, 1);
  const CompareResult many = compare_seeds(quick(1), seeds, 3);
  REQUIRE(one.rows.size() == 3);
  CHECK(one.rows[0].seed == 5);
  CHECK(one.rows[1].seed == 3);
  CHECK(one.rows == many.rows);
  CHECK(write_compare_csv(one) == write_compare_csv(many));
  REQUIRE(one.summary.has_value());
  CHECK(write_compare_summary(one) == write_compare_summary(many));

  const CompareResult single = compare_seeds(quick(1), {9}, 1);
  CHECK(single.rows.size() == 1);
  CHECK_FALSE(single.summary.has_value());
  CHECK(write_compare_summary(single).find("null") != std::string::npos);
}

TEST_CASE("compare rows match individual runs") {
  Scenario s = quick(1);
  const CompareResult cr = compare_seeds(s, {7}, 1);
  s.seed = 7;
  const RunResult m = run(s, RunMode::Mechanism);
  const RunResult b = run(s, RunMode::Baseline);
  for (std::size_t t = 0; t < 5; ++t) {
    CHECK(cr.rows[0].mechanism[t].deadweight_loss == m.metrics[t].deadweight_loss);
    CHECK(cr.rows[0].baseline[t].deadweight_loss == b.metrics[t].deadweight_loss);
    CHECK(cr.rows[0].mechanism[t].trades == m.metrics[t].trades);
  }
}

TEST_CASE("sign test") {
  CHECK(sign_test_p(0, 10) == doctest::Approx(1.0));
  CHECK(sign_test_p(10, 10) == doctest::Approx(1.0 / 1024));
  CHECK(sign_test_p(8, 10) == doctest::Approx(56.0 / 1024));
  CHECK(sign_test_p(0, 0) == doctest::Approx(1.0));
  CHECK(sign_test_p(600, 1000) < 1e-9);
}
