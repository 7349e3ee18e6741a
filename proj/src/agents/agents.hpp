#pragma once

#include <optional>
#include <span>
#include <vector>

#include "core/ids.hpp"
#include "core/money.hpp"
#include "core/params.hpp"
#include "core/probability.hpp"
#include "mechanisms/auction.hpp"
#include "payoffs/payoffs.hpp"

namespace bidride {

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

double distance_km(GeoPoint a, GeoPoint b);
/// Travel time at constant speed, rounded up to whole seconds.
Seconds travel_time(GeoPoint a, GeoPoint b, double speed_kmh);

struct Beliefs {
  Money psi_od;  // smoothed opportunity net profit
  Probability beta_od = Probability::from_ppb(500'000'000);
};

struct DriverProfile {
  DriverId id;
  GeoPoint location;
  int neighborhood = 0;
  double speed_kmh = 30.0;
  double quality = 0.5;        // [0, 1]
  Money cost_per_km = Money::cents(40);
  Money fixed_cost = Money::cents(100);
  Money margin = Money::cents(50);
  double auto_rate = 0.3;      // chance of using an automatic preference state
  Fraction priority_fraction = Fraction::from_ppb(850'000'000);
  Fraction standard_fraction = Fraction::from_ppb(1'000'000'000);
  Beliefs beliefs;

  void validate() const;
};

/// Economics of serving one ride of the given length, with beta_ld supplied
/// by the caller (likelihood of a better concurrent opportunity).
DriverEconomics ride_economics(const DriverProfile& p, double ride_km, Probability beta_ld);

struct CustomerPolicy {
  Fraction alpha = Fraction::from_ppb(800'000'000);  // T1 range bottom as share of top
  Fraction shade = Fraction::from_ppb(1'000'000'000);  // opening bid as share of valuation
};

struct CustomerRequest {
  CustomerId id;
  GeoPoint origin;
  GeoPoint destination;
  int neighborhood = 0;
  Money valuation;
  CustomerPolicy policy;
  Probability patience = Probability::one();  // chance of using a revision
};

struct CustomerProposal {
  CustomerBid bid;
  /// T2 only: the immediate downward revision from the standard price.
  std::optional<CustomerBid> revision;
};

/// A bid the request's valuation supports under the type's rules, or nullopt
/// when the customer declines to open an auction.
std::optional<CustomerProposal> propose_customer_bid(const CustomerRequest& request,
                                                     const PriceQuote& quote,
                                                     MechanismType type,
                                                     const PricingParams& params);

/// Upward revision after a round without an acceptable bid: the cap moves
/// towards the valuation in equal steps over the remaining allowance.
/// nullopt when no revision applies (T2/T4, allowance used, cap at
/// valuation).
std::optional<CustomerBid> next_customer_revision(const CustomerRequest& request,
                                                  const AuctionState& state);

/// What a selected driver sees of an auction.
struct AuctionView {
  MechanismType type = MechanismType::T2;
  PriceQuote quote;
  CustomerBid customer_bid;
  Interval admissible;
  double ride_km = 0.0;
  double pickup_km = 0.0;
};

/// Caps of other auctions the driver is concurrently selected for.
struct ConcurrentOpportunity {
  Money cap;
};

/// Share of concurrent opportunities whose cap exceeds this auction's.
Probability opportunity_likelihood(Money cap, std::span<const ConcurrentOpportunity> others);

/// Break-even: D_v + D_f + comb(beta_od, beta_ld) * psi_od, rounded half-up.
Money break_even(const DriverEconomics& e, Combinator comb);

/// Picks a preference state. The target price is break-even plus margin,
/// clamped to the admissible interval (and below the customer's cap where a
/// bid above it cannot clear). NoBid when even the top is below break-even;
/// nullopt when the driver is locked out. `u` in [0,1) decides between an
/// automatic state and a manual bid.
std::optional<DriverPreference> choose_driver_action(
    const DriverProfile& profile, const AuctionView& view,
    std::span<const ConcurrentOpportunity> concurrent, double u, bool locked_out,
    Combinator comb = Combinator::Product);

/// Price the preference would bid under the view (nullopt for NoBid).
std::optional<Money> implied_price(const DriverPreference& pref, const AuctionView& view);

struct BeliefObservation {
  Money alternative_profit;  // best net profit seen elsewhere, floored at 0
  bool won = false;
};

/// Exponential smoothing, one step per observation in order:
///   psi_od <- (1 - lambda) psi_od + lambda * alternative
///   beta_od <- (1 - lambda) beta_od + lambda * won
Beliefs update_beliefs(Beliefs b, std::span<const BeliefObservation> window,
                       Fraction lambda = Fraction::from_ppb(200'000'000));

}  // namespace bidride
