#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "core/ids.hpp"
#include "core/ledger.hpp"
#include "core/money.hpp"
#include "core/params.hpp"

namespace bidride {

struct GuaranteeTerms {
  Fraction discount_rate = Fraction::from_ppb(250'000'000);
  Seconds customer_grace = minutes(10);
  // (lateness threshold, fee), thresholds ascending; the last entry whose
  // threshold the lateness reaches applies.
  std::vector<std::pair<Seconds, Money>> fulfillment_fees = {
      {minutes(10), Money::cents(200)},
      {minutes(20), Money::cents(300)},
      {minutes(30), Money::cents(500)}};
  Fraction fulfillment_share = Fraction::from_ppb(500'000'000);
  Money incentive_fee = Money::cents(100);
  Seconds incentive_deadline = minutes(60);

  /// Discount rate within [0.15, 0.35], schedule ascending and non-decreasing,
  /// share within [0, 1]. Throws InvalidParameter.
  void validate() const;
  Money fulfillment_fee_for(Seconds lateness) const;
};

struct RideTimes {
  Tick promised_pickup = 0;
  Tick driver_arrival = 0;
  Tick customer_arrival = 0;
  Tick clock_start = 0;  // when the incentive clock starts (assignment)
  Tick completion = 0;
};

struct RideCharges {
  Money price;
  Money driver_fee;
  Money taxes;
  Money third_party;
};

struct GuaranteeOutcome {
  Money customer_discount;
  Money driver_deduction;   // actually taken from the driver fee
  Money fulfillment_fee;
  Money driver_fulfillment_share;
  Money incentive_fee;
  bool driver_late = false;
  bool customer_late = false;
  bool incentive_earned = false;
  bool clamped = false;      // deduction exceeded the fee and was clamped
  SettlementTerms terms;

  Money customer_pays() const { return terms.ride_payment + terms.fulfillment_fee; }
  Money driver_receives() const {
    return terms.driver_fee + terms.fulfillment_share + terms.incentive_fee;
  }
};

/// A late driver gives the customer discount_rate * price, deducted from the
/// driver fee (clamped at zero). A customer arriving more than the grace
/// period after the promised pickup pays the scheduled fee, of which
/// fulfillment_share goes to the driver. Completing within the incentive
/// deadline earns the platform-funded incentive fee.
GuaranteeOutcome apply_guarantees(const RideCharges& charges, const GuaranteeTerms& terms,
                                  const RideTimes& times);

// ---------------------------------------------------------------------------
// Revenue reconciliation

enum class RevenueStatus { Ok, UnderReporting, OverReporting, GhostRide };
std::string_view to_string(RevenueStatus s);

struct RevenueCheck {
  RevenueStatus status = RevenueStatus::Ok;
  Money estimated;
  Money reported;
  double relative_error = 0.0;
  bool ok() const { return status == RevenueStatus::Ok; }
};

/// Compares a reported revenue to an estimate; zero occupancy with non-zero
/// revenue is a ghost ride.
RevenueCheck reconcile_revenue(Money estimated, Money reported, Seconds occupancy,
                               double tolerance = 0.10);

/// Estimate from sensor occupancy: meter fare for occupancy at the estimated
/// distance per minute.
Money estimate_revenue(Seconds occupancy, const MeterRate& rate, double km_per_minute);

RevenueCheck reconcile_revenue(Seconds occupancy, const MeterRate& rate,
                               double km_per_minute, Money reported,
                               double tolerance = 0.10);

}  // namespace bidride
