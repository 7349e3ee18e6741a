#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/money.hpp"
#include "core/params.hpp"
#include "mechanisms/auction.hpp"

namespace bidride {

inline constexpr int kInstanceFormatVersion = 1;
inline constexpr int kMaxVerifyDrivers = 4;
inline constexpr int kMaxVerifyLevels = 7;

struct SmallDriver {
  Money cost;  // reservation price: total cost of serving the ride
  Seconds eta = 0;
  double quality = 0.0;
  std::vector<Money> levels;  // bid grid, in the order actions are indexed
};

/// One customer, a handful of drivers, every driver choosing a grid bid (or
/// no bid, when allowed). Prices are given directly rather than quoted from a route.
struct SmallInstance {
  MechanismType type = MechanismType::T2;
  Money valuation;
  Money standard;
  Money base;
  CustomerBid customer_bid;           // the customer's standing bid
  std::vector<Money> customer_caps;   // alternative caps for buyer deviations
  PricingParams params;
  PlatformEconomics economics;
  std::vector<SmallDriver> drivers;
  bool allow_no_bid = false;  // adds a no-bid action after the grid
  int restarts = 50;
  int max_rounds = 100;
  std::uint64_t seed = 1;

  PriceQuote quote() const { return {standard, standard, base}; }

  /// Throws Refused when the instance is too large or has an empty grid,
  /// InvalidParameter for inconsistent values.
  void validate() const;
};

/// Action index per driver: 0..levels-1 is a grid bid, levels is no bid when
/// the instance allows it.
using Profile = std::vector<int>;

struct Outcome {
  std::optional<int> winner;
  Money price;
  Money driver_fee;
  Money taxes;
  Money third_party;
  std::vector<Money> utilities;  // customer, platform, then one per driver
  bool balanced = true;
};

/// Customer at index 0, platform at 1, driver i at 2 + i.
inline constexpr int kCustomerParty = 0;
inline constexpr int kPlatformParty = 1;

/// Driver bids are given as prices so off-grid reports can be evaluated;
/// nullopt is no bid.
Outcome evaluate_outcome(const SmallInstance& inst, Money customer_cap,
                         const std::vector<std::optional<Money>>& bids);
Outcome evaluate_profile(const SmallInstance& inst, const Profile& p);

struct Witness {
  int party = -1;
  Profile profile;
  std::optional<Money> customer_cap;
  std::optional<Money> deviation;
  std::string note;

  friend bool operator==(const Witness&, const Witness&) = default;
};

struct Allocation {
  std::optional<int> driver;
  Money price;

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

struct RestartResult {
  Profile start;
  std::optional<Profile> fixed_point;  // nullopt when the dynamics cycled
  int rounds = 0;

  friend bool operator==(const RestartResult&, const RestartResult&) = default;
};

struct PropertyReport {
  bool ir_buyer = true;
  std::optional<Witness> ir_buyer_witness;
  bool ir_seller = true;
  std::optional<Witness> ir_seller_witness;
  bool sbb = true;
  std::optional<Witness> sbb_witness;
  Money dsic_gap;
  std::optional<Witness> dsic_witness;
  bool pareto = true;
  std::optional<Allocation> pareto_dominating;
  Allocation truthful_allocation;
  Money realized_welfare;
  Money max_welfare;
  double welfare_ratio = 1.0;
  std::vector<Profile> fixed_points;  // distinct, sorted
  std::vector<RestartResult> restarts;
  std::vector<Profile> pure_nash;  // sorted
  bool unique_pure_nash = false;
  std::int64_t profiles_enumerated = 0;

  friend bool operator==(const PropertyReport&, const PropertyReport&) = default;
};

/// Exhaustive enumeration of every bid profile. Throws Refused on oversize.
PropertyReport check_properties(const SmallInstance& inst);

/// Every profile where no driver gains by a unilateral change, sorted.
std::vector<Profile> enumerate_pure_nash(const SmallInstance& inst);

/// Asynchronous best-response dynamics from `restarts` seeded random starts,
/// round-robin over drivers, each moving to its lowest-index strictly
/// improving action.
std::vector<RestartResult> best_response_dynamics(const SmallInstance& inst);

/// Distinct fixed points reached, sorted.
std::vector<Profile> find_fixed_points(const SmallInstance& inst);

SmallInstance parse_instance(std::string_view text);
SmallInstance load_instance(const std::string& path);
std::string instance_json(const SmallInstance& inst);

std::string report_json(const SmallInstance& inst, const PropertyReport& r);
/// Inverse of report_json for the report part.
PropertyReport parse_report(std::string_view text);

}  // namespace bidride
