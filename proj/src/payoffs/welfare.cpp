#include "payoffs/welfare.hpp"

#include "core/error.hpp"

namespace bidride {

WelfareMetrics surplus_and_dwl(std::span<const TradeRecord> records) {
  WelfareMetrics m;
  for (const auto& r : records) {
    if (r.executed) {
      ++m.executed;
      m.consumer_surplus += r.valuation - r.payment;
      m.producer_surplus += r.driver_pay - r.driver_cost;
    } else if (r.valuation > r.reference_cost) {
      ++m.forgone;
      m.deadweight_loss += r.valuation - r.reference_cost;
    }
  }
  return m;
}

WelfareComparison compare_welfare(std::uint64_t mechanism_seed,
                                  std::span<const TradeRecord> mechanism,
                                  std::uint64_t baseline_seed,
                                  std::span<const TradeRecord> baseline) {
  if (mechanism_seed != baseline_seed) {
    fail(ErrorKind::IncomparableBaseline, "baseline was run on a different seed");
  }
  if (mechanism.size() != baseline.size()) {
    fail(ErrorKind::IncomparableBaseline, "baseline saw a different request set");
  }
  for (std::size_t i = 0; i < mechanism.size(); ++i) {
    if (mechanism[i].valuation != baseline[i].valuation ||
        mechanism[i].reference_cost != baseline[i].reference_cost) {
      fail(ErrorKind::IncomparableBaseline,
           "baseline request " + std::to_string(i) + " differs from mechanism");
    }
  }
  return {mechanism_seed, surplus_and_dwl(mechanism), surplus_and_dwl(baseline)};
}

Money driver_regret(Money realized, std::span<const Money> alternatives) {
  Money best = realized;
  for (Money a : alternatives) best = max(best, a);
  return best - realized;
}

}  // namespace bidride
