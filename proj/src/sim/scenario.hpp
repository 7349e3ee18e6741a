#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "agents/agents.hpp"
#include "core/money.hpp"
#include "core/params.hpp"
#include "core/probability.hpp"
#include "integrity/guarantees.hpp"

namespace bidride {

inline constexpr int kScenarioFormatVersion = 1;

struct Range {
  double min = 0.0;
  double max = 0.0;
};

struct CityConfig {
  GeoPoint origin{40.70, -74.02};  // south-west corner
  double cell_km = 1.0;
  int rows = 8;
  int cols = 8;
  int neighborhood_cells = 4;      // neighborhoods are square blocks of cells

  int neighborhoods_per_row() const { return (cols + neighborhood_cells - 1) / neighborhood_cells; }
  int neighborhood_count() const {
    return ((rows + neighborhood_cells - 1) / neighborhood_cells) * neighborhoods_per_row();
  }
  /// Neighborhood of a point, clamped to the grid.
  int neighborhood_of(GeoPoint p) const;
  GeoPoint point_at(double north_km, double east_km) const;
};

struct FleetConfig {
  int drivers = 60;
  Range speed_kmh{25.0, 35.0};
  Range quality{0.0, 1.0};
  Range cost_per_km{30.0, 60.0};      // cents
  Range fixed_cost{50.0, 150.0};      // cents
  Range margin{20.0, 80.0};           // cents
  double auto_rate = 0.3;
  Range priority_fraction{0.75, 0.95};
  Range standard_fraction{0.85, 1.15};
  Range initial_psi_od{0.0, 200.0};   // cents
  double initial_beta_od = 0.5;
  double logoffs_per_day = 1.0;
  Range off_duty_minutes{30.0, 120.0};
  Seconds min_return = minutes(30);
};

struct DemandConfig {
  double arrivals_per_hour = 30.0;
  // Valuation = meter fare * exp(N(mu, sigma)).
  double valuation_mu = 0.2;
  double valuation_sigma = 0.35;
  Range alpha{0.7, 0.9};
  Range shade{0.85, 1.0};
  double patience = 0.7;
  double min_trip_km = 1.0;
  double multi_open_probability = 0.0;  // chance a request opens sibling auctions
  int multi_open_max = 3;
};

struct RideNoise {
  double driver_late_probability = 0.15;
  Seconds driver_late_max = 600;
  double customer_late_probability = 0.1;
  Seconds customer_late_max = minutes(40);
  double gps_inflation_probability = 0.02;
  Range gps_inflation{0.3, 0.8};
  Seconds response_delay_max = 200;
};

struct IntegrityConfig {
  Fraction collusion_band = Fraction::from_ppb(100'000'000);
  int min_customers = 5;
  Seconds collusion_window = hours(24);
  Seconds logoff_delta = 120;
  int min_occasions = 3;
  double distance_tolerance = 0.15;
  double revenue_tolerance = 0.10;
};

struct Scenario {
  int format_version = kScenarioFormatVersion;
  std::uint64_t seed = 1;
  Seconds duration = hours(4);
  CityConfig city;
  FleetConfig fleet;
  DemandConfig demand;
  std::array<double, 5> mechanism_mix{0.0, 1.0, 0.0, 0.0, 0.0};
  std::array<PricingParams, 5> pricing{
      PricingParams::defaults_for(MechanismType::T1),
      PricingParams::defaults_for(MechanismType::T2),
      PricingParams::defaults_for(MechanismType::T3),
      PricingParams::defaults_for(MechanismType::T4),
      PricingParams::defaults_for(MechanismType::T5)};
  PlatformEconomics economics;
  Money brand_subsidy = Money::zero();
  GuaranteeTerms guarantees;
  RideNoise ride;
  IntegrityConfig integrity;
  Fraction learning_rate = Fraction::from_ppb(200'000'000);
  Combinator combinator = Combinator::Product;
  bool check_invariants = true;

  const PricingParams& pricing_for(MechanismType t) const { return pricing[index_of(t)]; }

  /// Throws InvalidParameter with a field path.
  void validate() const;
};

/// Parses the JSON scenario format. Unknown fields are rejected. Throws Parse
/// with "line:column" for syntax errors and a dotted field path otherwise.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

/// Canonical JSON of the fully-defaulted scenario, stable across runs.
std::string canonical_json(const Scenario& s);

/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string scenario_digest(const Scenario& s);

}  // namespace bidride
