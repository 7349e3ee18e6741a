#include "integrity/guarantees.hpp"

#include <cmath>

#include "core/error.hpp"

namespace bidride {

void GuaranteeTerms::validate() const {
  if (discount_rate < Fraction::from_ppb(150'000'000) ||
      discount_rate > Fraction::from_ppb(350'000'000))
    fail(ErrorKind::InvalidParameter, "discount_rate must lie in [0.15, 0.35]");
  if (customer_grace < 0) fail(ErrorKind::InvalidParameter, "customer_grace is negative");
  for (std::size_t i = 0; i < fulfillment_fees.size(); ++i) {
    const auto& [at, fee] = fulfillment_fees[i];
    if (at < 0 || fee < Money::zero())
      fail(ErrorKind::InvalidParameter, "fulfillment fee schedule entries must be non-negative");
    if (i > 0 && (at <= fulfillment_fees[i - 1].first || fee < fulfillment_fees[i - 1].second))
      fail(ErrorKind::InvalidParameter,
           "fulfillment fee schedule must be ascending and non-decreasing");
  }
  if (fulfillment_share > Fraction::from_ppb(Fraction::kScale))
    fail(ErrorKind::InvalidParameter, "fulfillment_share exceeds 1");
  if (incentive_fee < Money::zero()) fail(ErrorKind::InvalidParameter, "incentive_fee is negative");
  if (incentive_deadline < 0)
    fail(ErrorKind::InvalidParameter, "incentive_deadline is negative");
}

Money GuaranteeTerms::fulfillment_fee_for(Seconds lateness) const {
  Money fee = Money::zero();
  for (const auto& [at, f] : fulfillment_fees)
    if (lateness >= at) fee = f;
  return fee;
}

GuaranteeOutcome apply_guarantees(const RideCharges& c, const GuaranteeTerms& terms,
                                  const RideTimes& t) {
  terms.validate();
  if (c.price < Money::zero() || c.driver_fee < Money::zero())
    fail(ErrorKind::InvalidParameter, "price and driver fee must be non-negative");
  GuaranteeOutcome o;
  Money payment = c.price;
  Money fee = c.driver_fee;

  if (t.driver_arrival > t.promised_pickup) {
    o.driver_late = true;
    o.customer_discount = apply_fraction(c.price, terms.discount_rate);
    payment = payment - o.customer_discount;
    if (o.customer_discount > fee) {
      o.clamped = true;
      o.driver_deduction = fee;
    } else {
      o.driver_deduction = o.customer_discount;
    }
    fee = fee - o.driver_deduction;
  }

  const Seconds lateness = t.customer_arrival - t.promised_pickup;
  if (lateness > terms.customer_grace) {
    o.customer_late = true;
    o.fulfillment_fee = terms.fulfillment_fee_for(lateness);
    o.driver_fulfillment_share = apply_fraction(o.fulfillment_fee, terms.fulfillment_share);
  }

  if (terms.incentive_fee > Money::zero() &&
      t.completion - t.clock_start <= terms.incentive_deadline) {
    o.incentive_earned = true;
    o.incentive_fee = terms.incentive_fee;
  }

  o.terms.ride_payment = payment;
  o.terms.fulfillment_fee = o.fulfillment_fee;
  o.terms.driver_fee = fee;
  o.terms.fulfillment_share = o.driver_fulfillment_share;
  o.terms.incentive_fee = o.incentive_fee;
  o.terms.taxes = c.taxes;
  o.terms.third_party = c.third_party;
  return o;
}

std::string_view to_string(RevenueStatus s) {
  switch (s) {
    case RevenueStatus::Ok: return "ok";
    case RevenueStatus::UnderReporting: return "under_reporting";
    case RevenueStatus::OverReporting: return "over_reporting";
    case RevenueStatus::GhostRide: return "ghost_ride";
  }
  return "?";
}

RevenueCheck reconcile_revenue(Money estimated, Money reported, Seconds occupancy,
                               double tolerance) {
  if (!(tolerance >= 0.0)) fail(ErrorKind::InvalidParameter, "tolerance must be non-negative");
  RevenueCheck r;
  r.estimated = estimated;
  r.reported = reported;
  if (occupancy <= 0) {
    r.status = reported == Money::zero() ? RevenueStatus::Ok : RevenueStatus::GhostRide;
    r.relative_error = reported == Money::zero() ? 0.0 : 1.0;
    return r;
  }
  const double est = static_cast<double>(estimated.cents());
  const double diff = static_cast<double>((reported - estimated).cents());
  r.relative_error = est > 0.0 ? std::abs(diff) / est : (diff == 0.0 ? 0.0 : 1.0);
  if (r.relative_error > tolerance)
    r.status = reported < estimated ? RevenueStatus::UnderReporting
                                    : RevenueStatus::OverReporting;
  return r;
}

Money estimate_revenue(Seconds occupancy, const MeterRate& rate, double km_per_minute) {
  if (occupancy <= 0) return Money::zero();
  if (!(km_per_minute > 0.0))
    fail(ErrorKind::InvalidParameter, "km_per_minute must be positive");
  RouteEstimate r;
  r.duration = occupancy;
  r.distance_m = std::llround(km_per_minute * 1000.0 * static_cast<double>(occupancy) / 60.0);
  if (r.distance_m <= 0) r.distance_m = 1;
  return meter_fare(rate, r);
}

RevenueCheck reconcile_revenue(Seconds occupancy, const MeterRate& rate,
                               double km_per_minute, Money reported, double tolerance) {
  return reconcile_revenue(estimate_revenue(occupancy, rate, km_per_minute), reported,
                           occupancy, tolerance);
}

}  // namespace bidride
