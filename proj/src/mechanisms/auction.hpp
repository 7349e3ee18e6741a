#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "core/ids.hpp"
#include "core/money.hpp"
#include "core/params.hpp"
#include "mechanisms/lockout.hpp"

namespace bidride {

// ---------------------------------------------------------------------------
// Driver preference states

/// What a selected driver pre-sets in the app. Which actions exist, and which
/// S_d state number they carry, depends on the mechanism type:
///
///   T1:     S_d1 Manual, S_d2 AutoMidpoint, S_d3 NoBid
///   T2:     S_d1 AcceptStandard, S_d2 Manual, S_d3 NoBid
///   T3, T5: S_d1 AcceptCustomerPrice, S_d2 FractionOfPriority,
///           S_d3 AcceptStandard, S_d4 Manual, S_d5 NoBid
///   T4:     S_d1 AcceptCustomerPrice, S_d2 AcceptStandard,
///           S_d3 FractionOfStandard, S_d4 Manual, S_d5 NoBid
enum class BidAction : std::uint8_t {
  Manual,
  AutoMidpoint,
  AcceptStandard,
  AcceptCustomerPrice,
  FractionOfPriority,
  FractionOfStandard,
  NoBid,
};

std::string_view to_string(BidAction a);

struct DriverPreference {
  BidAction action = BidAction::NoBid;
  std::optional<Money> manual_price;
  std::optional<Fraction> preset_fraction;

  static DriverPreference manual(Money price) {
    return {BidAction::Manual, price, std::nullopt};
  }
  static DriverPreference with_fraction(BidAction a, Fraction f) {
    return {a, std::nullopt, f};
  }
  static DriverPreference automatic(BidAction a) { return {a, std::nullopt, std::nullopt}; }
  static DriverPreference no_bid() { return {}; }
};

/// S_d state number (1-based) of an action under a type, or nullopt when the
/// type does not offer it.
std::optional<int> preference_state(MechanismType type, BidAction action);

// ---------------------------------------------------------------------------
// Customer side

/// The customer's standing bid. `cap` is C_n for T1/T4 (for T1 the top of the
/// customer range), the accepted standard price for T2, and the priority price
/// for T3/T5. `low` is the bottom of the T1 range and equals cap elsewhere.
struct CustomerBid {
  Money low;
  Money cap;
  int revision_count = 0;

  static CustomerBid range(Money lo, Money hi) { return {lo, hi, 0}; }
  static CustomerBid single(Money cap) { return {cap, cap, 0}; }
};

/// Maximum number of customer revisions per type (T1 2, T2 1, T3 2, T4 0, T5 1).
int revision_limit(MechanismType type);

struct PriceQuote {
  Money meter;     // uncapped meter fare
  Money standard;  // Omega_cs
  Money base;      // Omega_cb
};

/// Standard price from the meter (T2 capped by standard_cap_factor) and base
/// price from the platform's break-even.
PriceQuote quote_prices(const PricingParams& params, const PlatformEconomics& econ,
                        const RouteEstimate& route,
                        Money brand_subsidy = Money::zero());

/// Inclusive money interval.
struct Interval {
  Money lo;
  Money hi;
  bool contains(Money m) const { return lo <= m && m <= hi; }
};

/// [round(standard * (1 - band)), round(standard * (1 + band))].
Interval flex_band(Money standard, Fraction band);

/// Where a driver bid must lie for the type given the customer's current bid.
/// T1 has no upper bound (hi is the largest representable amount).
Interval admissible_bid_interval(MechanismType type, const PriceQuote& quote,
                                 const CustomerBid& bid, const PricingParams& params);

/// Throws InvalidBid naming the violated bound.
void validate_customer_bid(MechanismType type, const PriceQuote& quote,
                           const CustomerBid& bid, const PricingParams& params);

// ---------------------------------------------------------------------------
// Auction state

enum class Phase : std::uint8_t {
  Opened,
  DriversSelected,
  Bidding,
  Revising,
  Assigned,
  Settled,
  Failed,
};

enum class FailureReason : std::uint8_t {
  None,
  NoSupply,
  NoBids,
  NoFeasibleBid,
  Cancelled,
};

std::string_view to_string(Phase p);
std::string_view to_string(FailureReason r);

struct DriverSnapshot {
  DriverId id;
  Seconds eta = 0;
  double quality = 0.0;
};

struct RecordedBid {
  Money price;
  BidAction action = BidAction::Manual;
  int round = 0;           // customer revision round the bid belongs to
  int revision_count = 0;  // how many times this driver has re-bid
  Tick placed_at = 0;
  bool withdrawn = false;
};

struct AuctionState {
  RideId ride_id;
  CustomerId customer;
  MechanismType type = MechanismType::T2;
  Phase phase = Phase::Opened;
  std::vector<Phase> history{Phase::Opened};  // every phase entered, in order
  FailureReason failure = FailureReason::None;
  PriceQuote quote;
  CustomerBid customer_bid;
  std::vector<DriverSnapshot> selected;
  bool thin_market = false;
  std::map<DriverId, RecordedBid> driver_bids;
  std::set<DriverId> declined;  // explicit no-bid or late responses
  std::set<DriverId> exempt;    // excused from the no-bid fee
  std::optional<Money> winning_bid;
  std::optional<DriverId> primary;
  std::optional<DriverId> secondary;
  Tick opened_at = 0;
  Tick bid_deadline = 0;
  Tick revision_deadline = 0;
  int round = 0;

  bool is_selected(DriverId d) const;
  /// Customer state label: S_c1 before any revision, then S_c2, S_c3.
  std::string customer_state() const {
    return "S_c" + std::to_string(customer_bid.revision_count + 1);
  }
};

/// A candidate for assignment.
struct RankedBid {
  DriverId driver;
  Money price;
  Seconds eta = 0;
  double quality = 0.0;
};

/// Orders candidates best-first. T1-T4: lowest price, then lower ETA, higher
/// quality, lower driver id. T5: highest price strictly below the priority
/// price `cap` with the same tie-breaks; bids at or above cap are dropped.
std::vector<RankedBid> rank_bids(MechanismType type, Money cap,
                                 std::vector<RankedBid> candidates);

class Auction {
 public:
  /// Quotes prices for the route and opens the auction. Throws InvalidBid when
  /// the customer's bid violates the type's constraints.
  static Auction open(RideId ride, CustomerId customer, const CustomerBid& bid,
                      const PricingParams& params, const PlatformEconomics& econ,
                      const RouteEstimate& route, Tick now,
                      Money brand_subsidy = Money::zero());
  static Auction open(RideId ride, CustomerId customer, const CustomerBid& bid,
                      const PriceQuote& quote, const PricingParams& params, Tick now);

  /// Relays the request to up to max_selected nearest eligible drivers
  /// (ETA, then id). Fewer than min_selected sets the thin-market flag; none
  /// fails the auction with NoSupply.
  void select_drivers(std::span<const DriverSnapshot> fleet,
                      const LockoutRegistry& lockouts, Tick now);

  /// Records the bid implied by the preference and returns its price, or
  /// nullopt for a no-bid. Throws RejectedBid (not selected, locked out,
  /// outside the admissible interval, no revision allowance) or LateBid
  /// (after the deadline; the driver is recorded as not bidding).
  std::optional<Money> submit_driver_bid(DriverId driver, const DriverPreference& pref,
                                         Tick now, const LockoutRegistry& lockouts);

  /// Throws RevisionRejected with the reason.
  void revise_customer_bid(const CustomerBid& new_bid, Tick now);

  /// Marks a bid withdrawn, e.g. after the driver won elsewhere. The driver is
  /// exempt from the no-bid fee.
  void withdraw_bid(DriverId driver);
  void exempt(DriverId driver);

  /// Active bids, best first.
  std::vector<RankedBid> ranked_bids() const;

  /// Picks primary and secondary once bidding has closed and writes the
  /// primary's lockout. Candidates whose lockout cannot be reserved are
  /// skipped. Fails the auction on no bids, or when no bid can clear against
  /// the customer's cap.
  void assign(Tick now, LockoutRegistry& lockouts);

  /// Selected drivers liable for the no-bid fee: no active bid, not exempt.
  std::vector<DriverId> no_bid_fee_liable() const;

  void mark_settled();
  void fail_with(FailureReason reason);

  const AuctionState& state() const { return state_; }
  const PricingParams& params() const { return params_; }
  Interval admissible() const;

 private:
  Auction(AuctionState state, const PricingParams& params)
      : state_(std::move(state)), params_(params) {}

  void advance(Phase next);
  Money price_for(const DriverPreference& pref) const;

  AuctionState state_;
  PricingParams params_;
};

}  // namespace bidride
