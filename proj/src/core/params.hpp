#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "core/ids.hpp"
#include "core/money.hpp"
#include "core/probability.hpp"

namespace bidride {

enum class MechanismType : std::uint8_t { T1 = 1, T2, T3, T4, T5 };

inline constexpr std::array<MechanismType, 5> kAllMechanisms = {
    MechanismType::T1, MechanismType::T2, MechanismType::T3,
    MechanismType::T4, MechanismType::T5};

std::string_view to_string(MechanismType t);
std::optional<MechanismType> parse_mechanism(std::string_view s);
inline int index_of(MechanismType t) { return static_cast<int>(t) - 1; }

struct MeterRate {
  Money flag_fall = Money::cents(250);
  Money per_km = Money::cents(150);
  Money per_minute = Money::cents(30);
};

struct RouteEstimate {
  std::int64_t distance_m = 0;
  Seconds duration = 0;

  double distance_km() const { return static_cast<double>(distance_m) / 1000.0; }
};

/// Meter fare for a route: flag + per_km * km + per_minute * minutes,
/// evaluated exactly and rounded half-up once.
Money meter_fare(const MeterRate& rate, const RouteEstimate& route);

struct PricingParams {
  MechanismType mechanism_type = MechanismType::T2;
  MeterRate meter;
  Fraction standard_cap_factor = Fraction::from_ppb(800'000'000);
  Fraction flex_band = Fraction::from_ppb(200'000'000);
  Fraction payout_fraction = Fraction::from_ppb(800'000'000);
  Fraction blackcar_payout_fraction = Fraction::from_ppb(850'000'000);
  Fraction guarantee_discount = Fraction::from_ppb(250'000'000);
  int min_selected = 3;
  int max_selected = 15;
  Seconds lockout_before = minutes(30);
  Seconds lockout_after = minutes(30);
  Seconds bid_window = minutes(3);
  Seconds revision_window = minutes(10);
  Money no_bid_fee = Money::cents(50);
  bool charge_no_bid_fee = true;

  /// Defaults per type: T1 locks 60 min either side and waives no-bid fees,
  /// T2-T4 lock 30 min either side, T5 locks 30 min after only.
  static PricingParams defaults_for(MechanismType t);

  /// Throws InvalidParameter naming the violated bound.
  void validate() const;

  /// The fee share the platform expects to pay out: the lesser fraction.
  Fraction expected_fee_split() const {
    return payout_fraction < blackcar_payout_fraction ? payout_fraction
                                                      : blackcar_payout_fraction;
  }
};

struct PlatformEconomics {
  Money beta_v = Money::cents(30);
  Money beta_f = Money::cents(40);
  Money psi_ob = Money::zero();
  Probability beta_ob = Probability::zero();
  Probability beta_lb = Probability::zero();
  Probability beta_id = Probability::one();
  Fraction taxes_rate;
  Money third_party_fee = Money::zero();

  void validate() const;
  Money platform_cost() const { return beta_v + beta_f; }
};

}  // namespace bidride
