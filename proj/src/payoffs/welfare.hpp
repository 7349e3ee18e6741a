#pragma once

#include <cstdint>
#include <span>

#include "core/money.hpp"

namespace bidride {

/// One customer request as seen by the welfare accounting. reference_cost is
/// the cheapest combined driver + platform cost of serving the request and is
/// a property of the demand/supply draws, not of the pricing rule.
struct TradeRecord {
  Money valuation;
  Money reference_cost;
  bool executed = false;
  Money payment;      // customer's final payment, executed trades only
  Money driver_pay;   // driver's final pay
  Money driver_cost;  // serving driver's D_v + D_f
};

struct WelfareMetrics {
  Money consumer_surplus;
  Money producer_surplus;
  Money deadweight_loss;
  std::int64_t executed = 0;
  std::int64_t forgone = 0;  // surplus-positive requests that did not trade
};

WelfareMetrics surplus_and_dwl(std::span<const TradeRecord> records);

struct WelfareComparison {
  std::uint64_t seed = 0;
  WelfareMetrics mechanism;
  WelfareMetrics baseline;
};

/// Mechanism vs baseline on the same draws. Throws IncomparableBaseline when
/// the seeds differ or the request sets do not line up.
WelfareComparison compare_welfare(std::uint64_t mechanism_seed,
                                  std::span<const TradeRecord> mechanism,
                                  std::uint64_t baseline_seed,
                                  std::span<const TradeRecord> baseline);

/// max(0, best alternative expected payoff - realised payoff).
Money driver_regret(Money realized, std::span<const Money> alternatives);

}  // namespace bidride
