#include "core/params.hpp"

#include <string>

#include "core/error.hpp"

namespace bidride {

std::string_view to_string(MechanismType t) {
  switch (t) {
    case MechanismType::T1: return "T1";
    case MechanismType::T2: return "T2";
    case MechanismType::T3: return "T3";
    case MechanismType::T4: return "T4";
    case MechanismType::T5: return "T5";
  }
  return "?";
}

std::optional<MechanismType> parse_mechanism(std::string_view s) {
  for (auto t : kAllMechanisms) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

Money meter_fare(const MeterRate& rate, const RouteEstimate& route) {
  if (route.distance_m <= 0 || route.duration <= 0) {
    fail(ErrorKind::InvalidParameter, "route estimate must be positive");
  }
  // per_km * m / 1000 + per_minute * s / 60, over the common denominator 60000.
  const __int128 num =
      static_cast<__int128>(rate.per_km.cents()) * route.distance_m * 60 +
      static_cast<__int128>(rate.per_minute.cents()) * route.duration * 1000;
  const __int128 cents = div_round_half_up(num, 60000);
  return rate.flag_fall + Money::cents(static_cast<std::int64_t>(cents));
}

PricingParams PricingParams::defaults_for(MechanismType t) {
  PricingParams p;
  p.mechanism_type = t;
  switch (t) {
    case MechanismType::T1:
      p.lockout_before = minutes(60);
      p.lockout_after = minutes(60);
      p.charge_no_bid_fee = false;
      break;
    case MechanismType::T5:
      p.lockout_before = 0;
      p.lockout_after = minutes(30);
      break;
    default:
      break;
  }
  return p;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::InvalidParameter, what);
}

constexpr Fraction ppb(std::int64_t v) { return Fraction::from_ppb(v); }

}  // namespace

void PricingParams::validate() const {
  require(standard_cap_factor >= ppb(700'000'000) &&
              standard_cap_factor <= ppb(850'000'000),
          "standard_cap_factor must lie in [0.70, 0.85]");
  require(flex_band > ppb(0) && flex_band < ppb(1'000'000'000),
          "flex_band must lie in (0, 1)");
  require(payout_fraction >= ppb(750'000'000) &&
              payout_fraction <= ppb(900'000'000),
          "payout_fraction must lie in [0.75, 0.90]");
  require(blackcar_payout_fraction <= ppb(1'000'000'000),
          "blackcar_payout_fraction must lie in [0, 1]");
  require(guarantee_discount >= ppb(150'000'000) &&
              guarantee_discount <= ppb(350'000'000),
          "guarantee_discount must lie in [0.15, 0.35]");
  require(max_selected <= 15, "max_selected exceeds 15");
  require(min_selected >= 3, "min_selected below 3");
  require(min_selected <= max_selected, "min_selected exceeds max_selected");
  require(lockout_before >= 0 && lockout_after >= 0,
          "lockout durations must be non-negative");
  require(bid_window > 0, "bid_window must be positive");
  require(revision_window > 0, "revision_window must be positive");
  require(no_bid_fee >= Money::zero(), "no_bid_fee must be non-negative");
  require(meter.per_km >= Money::zero() && meter.per_minute >= Money::zero() &&
              meter.flag_fall >= Money::zero(),
          "meter rates must be non-negative");
}

void PlatformEconomics::validate() const {
  require(beta_v >= Money::zero(), "beta_v must be non-negative");
  require(beta_f >= Money::zero(), "beta_f must be non-negative");
  require(psi_ob >= Money::zero(), "psi_ob must be non-negative");
  require(taxes_rate < ppb(1'000'000'000), "taxes_rate must lie in [0, 1)");
  require(third_party_fee >= Money::zero(),
          "third_party_fee must be non-negative");
}

}  // namespace bidride
