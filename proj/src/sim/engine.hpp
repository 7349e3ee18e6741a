#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/event_log.hpp"
#include "core/ledger.hpp"
#include "integrity/collusion.hpp"
#include "integrity/gps.hpp"
#include "integrity/guarantees.hpp"
#include "mechanisms/auction.hpp"
#include "payoffs/payoffs.hpp"
#include "payoffs/welfare.hpp"
#include "sim/scenario.hpp"
#include "sim/world.hpp"

namespace bidride {

enum class RunMode { Mechanism, Baseline };
std::string_view to_string(RunMode m);

struct TypeMetrics {
  std::int64_t requests = 0;
  std::int64_t declined = 0;         // customer opened no auction / refused the price
  std::int64_t auctions = 0;
  std::int64_t thin_markets = 0;
  std::int64_t failed_no_supply = 0;
  std::int64_t failed_no_bids = 0;
  std::int64_t failed_no_feasible = 0;
  std::int64_t cancelled = 0;
  std::int64_t trades = 0;
  std::int64_t bids = 0;
  std::int64_t no_bids = 0;
  std::int64_t rejected_bids = 0;
  std::int64_t late_responses = 0;
  std::int64_t customer_revisions = 0;
  std::int64_t no_bid_fees = 0;
  Money no_bid_fee_total;
  Money gross_price;                  // sum of clearing prices
  Money consumer_surplus;
  Money producer_surplus;
  Money deadweight_loss;
  std::int64_t forgone = 0;
  Money regret;
  Money guarantee_discounts;
  Money fulfillment_fees;
  Money incentive_fees;
  std::int64_t late_drivers = 0;
  std::int64_t late_customers = 0;
  std::int64_t gps_flags = 0;
  std::int64_t revenue_flags = 0;
  Money platform_payoff;              // sum of expected P_o
  Money driver_payoff;                // sum of expected P_s
  Money platform_retention;

  friend bool operator==(const TypeMetrics&, const TypeMetrics&) = default;
};

struct BidRecord {
  DriverId driver;
  Money price;
  int round = 0;
  Interval admissible;  // at the time the bid was accepted
  Tick tick = 0;
};

struct AuctionRecord {
  RideId ride;
  CustomerId customer;
  MechanismType type = MechanismType::T2;
  PriceQuote quote;
  CustomerBid initial_bid;
  CustomerBid final_bid;
  std::vector<DriverId> selected;
  bool thin_market = false;
  std::vector<BidRecord> bids;
  std::optional<DriverId> primary;
  std::optional<DriverId> secondary;
  std::optional<Money> winning_bid;
  std::optional<Money> clearing_price;
  Branch branch = Branch::Single;
  Phase phase = Phase::Opened;
  std::vector<Phase> history;
  FailureReason failure = FailureReason::None;
};

struct RideOutcome {
  RideId ride;
  CustomerId customer;
  DriverId driver;
  MechanismType type = MechanismType::T2;
  Money cap;                // customer's final cap (fixed price in the baseline)
  std::optional<Money> winning_bid;
  Money price;              // clearing price
  PayoffResult payoff;
  DriverEconomics driver_economics;
  GuaranteeOutcome guarantees;
  Ledger ledger;
  DistanceCheck gps;
  RevenueCheck revenue;
  Tick assigned_at = 0;
  Tick pickup_at = 0;
  Tick completed_at = 0;
};

struct IntegrityReport {
  std::vector<CollusionGroup> collusion;
  std::vector<SyncLogoffPair> sync_logoffs;
  std::int64_t gps_discrepancies = 0;
  std::int64_t revenue_mismatches = 0;
};

struct RunFailure {
  std::uint64_t seed = 0;
  Tick tick = 0;
  std::string message;
};

struct LedgerTotals {
  std::map<std::string, Money> by_reason;
  std::map<std::string, Money> inflow_by_party;
  std::map<std::string, Money> outflow_by_party;
  Money inflow;
  Money outflow;
  std::int64_t ledgers = 0;
  std::int64_t unbalanced = 0;

  void add(const Ledger& l);
};

struct RunResult {
  std::uint64_t seed = 0;
  RunMode mode = RunMode::Mechanism;
  std::string scenario_digest;
  EventLog log;
  std::vector<AuctionRecord> auctions;
  std::vector<RideOutcome> rides;
  std::vector<TradeRecord> trades;            // one per request, in arrival order
  std::vector<MechanismType> trade_types;
  std::array<TypeMetrics, 5> metrics{};
  TypeMetrics totals;
  IntegrityReport integrity;
  LedgerTotals ledger;
  std::optional<RunFailure> failure;

  bool ok() const { return !failure.has_value(); }
};

/// Runs the scenario to completion: arrivals stop at the scenario duration,
/// auctions and rides already under way finish. An invariant violation stops
/// the run and is reported in `failure` with the seed and tick.
RunResult run(const Scenario& scenario, RunMode mode = RunMode::Mechanism);
RunResult run(const Scenario& scenario, const World& world, RunMode mode);

}  // namespace bidride
