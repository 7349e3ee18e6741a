#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sim/engine.hpp"

namespace bidride {

inline constexpr int kReportFormatVersion = 1;

struct CollusionSummary {
  int neighborhood = 0;
  std::vector<std::int64_t> drivers;
  Tick window_start = 0;
  Tick window_end = 0;
  std::int64_t customers = 0;

  friend bool operator==(const CollusionSummary&, const CollusionSummary&) = default;
};

struct SyncLogoffSummary {
  std::int64_t a = 0;
  std::int64_t b = 0;
  int occasions = 0;

  friend bool operator==(const SyncLogoffSummary&, const SyncLogoffSummary&) = default;
};

/// Everything the run report file carries; parse(write(r)) == r.
struct RunReport {
  int format_version = kReportFormatVersion;
  std::string scenario_digest;
  std::uint64_t seed = 0;
  RunMode mode = RunMode::Mechanism;
  std::optional<RunFailure> failure;
  std::int64_t events = 0;
  std::int64_t auctions = 0;
  std::int64_t rides = 0;
  std::array<TypeMetrics, 5> metrics{};
  TypeMetrics totals;
  std::vector<CollusionSummary> collusion;
  std::vector<SyncLogoffSummary> sync_logoffs;
  std::int64_t gps_discrepancies = 0;
  std::int64_t revenue_mismatches = 0;
  std::int64_t ledgers = 0;
  std::int64_t unbalanced_ledgers = 0;
  Money inflow;
  Money outflow;
  std::map<std::string, Money> by_reason;
  std::map<std::string, Money> inflow_by_party;
  std::map<std::string, Money> outflow_by_party;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

bool operator==(const RunFailure& a, const RunFailure& b);

RunReport make_report(const RunResult& r);

std::string write_report(const RunReport& r);
RunReport parse_report_json(std::string_view text);

/// One row per mechanism type plus a "total" row.
std::string write_metrics_csv(const RunReport& r);
struct MetricsTable {
  std::array<TypeMetrics, 5> metrics{};
  TypeMetrics totals;

  friend bool operator==(const MetricsTable&, const MetricsTable&) = default;
};
MetricsTable parse_metrics_csv(std::string_view text);

/// Output file names inside a run directory.
inline constexpr std::string_view kReportFile = "report.json";
inline constexpr std::string_view kMetricsFile = "metrics.csv";
inline constexpr std::string_view kEventsFile = "events.log";

// ---------------------------------------------------------------------------
// Matched-seed comparison against the fixed-price baseline

struct ComparePoint {
  Money consumer_surplus;
  Money producer_surplus;
  Money deadweight_loss;
  std::int64_t trades = 0;

  friend bool operator==(const ComparePoint&, const ComparePoint&) = default;
};

struct CompareRow {
  std::uint64_t seed = 0;
  std::array<ComparePoint, 5> mechanism{};
  std::array<ComparePoint, 5> baseline{};
  std::array<bool, 5> present{};  // the type had any requests on this seed
  bool ok = true;
  std::string failure;

  friend bool operator==(const CompareRow&, const CompareRow&) = default;
};

struct SignTest {
  MechanismType type = MechanismType::T1;
  std::int64_t seeds = 0;        // seeds where the type had requests
  double mean_mechanism_dwl = 0.0;
  double mean_baseline_dwl = 0.0;
  std::int64_t mechanism_lower = 0;
  std::int64_t baseline_lower = 0;
  std::int64_t ties = 0;
  double p_value = 1.0;          // one-sided: mechanism DWL lower
  bool direction_holds = false;  // mean mechanism DWL <= mean baseline DWL

  friend bool operator==(const SignTest&, const SignTest&) = default;
};

struct CompareResult {
  std::vector<CompareRow> rows;
  std::optional<std::array<SignTest, 5>> summary;  // absent for a single seed
};

/// Runs both modes for every seed; `threads` workers, each run isolated.
/// Rows come back in seed order regardless of scheduling.
CompareResult compare_seeds(const Scenario& scenario, const std::vector<std::uint64_t>& seeds,
                            int threads = 1);

/// P(X >= k) for X ~ Binomial(n, 1/2).
double sign_test_p(std::int64_t k, std::int64_t n);

std::array<SignTest, 5> summarize(const std::vector<CompareRow>& rows);

std::string write_compare_csv(const CompareResult& r);
std::string write_compare_summary(const CompareResult& r);

}  // namespace bidride
