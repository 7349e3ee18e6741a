#pragma once

#include <optional>

#include "core/money.hpp"
#include "core/params.hpp"
#include "core/probability.hpp"

namespace bidride {

struct DriverEconomics {
  Money d_v;     // variable cost of this ride
  Money d_f;     // allocated fixed cost
  Money psi_od;  // opportunity net profit
  Probability beta_od;
  Probability beta_ld;
  Probability beta_id = Probability::one();
  Probability beta_idw = Probability::one();

  void validate() const;
};

enum class Branch { Po1, Po2, Single };
std::string_view to_string(Branch b);

struct ClearingResult {
  Money price;
  Branch branch = Branch::Single;
  bool feasible = true;  // the winning bid is honoured at the cleared price
};

/// Cleared price for each mechanism, given the customer's cap (C_n for T1/T4,
/// the accepted standard price for T2, the priority price for T3/T5), the
/// winning bid, the base price and the standard price.
///
///   T1, T4: inner = max(0, winning, base); Po1 iff cap >= max(base, winning),
///           in which case the price is min(cap, inner); otherwise Po2 reports
///           inner as a no-trade diagnostic.
///   T2:     min(cap, max(base, 0, winning))
///   T3, T5: min(cap, max(winning, standard, 0, base))
ClearingResult clearing_price(MechanismType type, Money cap, Money winning_bid,
                              Money base, Money standard);

/// Smallest price at which the platform breaks even on a ride after paying the
/// expected fee split, taxes, third-party fees and its own costs, less any
/// brand subsidy, floored at zero.
Money compute_base_price(const PlatformEconomics& econ, Fraction expected_fee_split,
                         Money brand_subsidy);

/// The lesser of the black-car share and the payout share of the net fare.
Money compute_driver_fee(Money gross, Money taxes, Money third_party,
                         const PricingParams& params);

Money platform_payoff(Money price, Money driver_fee, const PlatformEconomics& econ,
                      Combinator comb);
Money driver_payoff(Money driver_fee, const DriverEconomics& d, Combinator comb);

// Unrounded values of the two payoffs, for analytics and oracle comparison.
long double platform_payoff_value(Money price, Money driver_fee,
                                  const PlatformEconomics& econ, Combinator comb);
long double driver_payoff_value(Money driver_fee, const DriverEconomics& d,
                                Combinator comb);

struct PayoffResult {
  Money clearing_price;
  Money platform_payoff;
  Money driver_payoff;
  Money driver_fee;
  Money taxes;
  Money third_party;
  bool feasible_trade = false;
  Branch branch = Branch::Single;
};

/// Full ride evaluation. Without a winning bid there is no fee and both
/// payoffs are zero.
PayoffResult evaluate_ride(MechanismType type, Money cap,
                           std::optional<Money> winning_bid, Money base,
                           Money standard, const PricingParams& params,
                           const PlatformEconomics& econ,
                           const DriverEconomics& driver, Combinator comb);

}  // namespace bidride
