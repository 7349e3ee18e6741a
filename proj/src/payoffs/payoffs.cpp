#include "payoffs/payoffs.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>

#include "core/error.hpp"

namespace bidride {

namespace {

using Wide = boost::multiprecision::checked_int256_t;

const Wide kE9 = Wide(Probability::kScale);
const Wide kE18 = kE9 * kE9;
const Wide kE36 = kE18 * kE18;

Money round_half_up(const Wide& num, const Wide& den) {
  const Wide n = 2 * num + den;
  const Wide d = 2 * den;
  Wide q = n / d;
  if (n % d != 0 && n < 0) q -= 1;
  if (q > Wide(std::numeric_limits<std::int64_t>::max()) ||
      q < Wide(std::numeric_limits<std::int64_t>::min())) {
    fail(ErrorKind::Overflow, "payoff exceeds the money range");
  }
  return Money::cents(q.convert_to<std::int64_t>());
}

Wide ceil_div(const Wide& num, const Wide& den) {
  Wide q = num / den;
  if (num % den != 0 && num > 0) q += 1;
  return q;
}

long double to_real(const Wide& num, const Wide& den) {
  // Split into integer and remainder so large numerators keep precision.
  const Wide q = num / den;
  const Wide r = num % den;
  return q.convert_to<long double>() +
         r.convert_to<long double>() / den.convert_to<long double>();
}

// P_o before flooring, in units of 1e-18 cents.
Wide platform_numerator(Money price, Money fee, const PlatformEconomics& econ,
                        Combinator comb) {
  const Wide margin = Wide(price.cents()) - fee.cents() - econ.beta_f.cents() -
                      econ.beta_v.cents();
  const Weight opp = combine(comb, econ.beta_ob, econ.beta_lb);
  const Wide n = Wide(econ.beta_id.ppb()) * kE9 * margin -
                 Wide(opp.units) * econ.psi_ob.cents();
  return n < 0 ? Wide(0) : n;
}

// P_s before flooring, in units of 1e-36 cents.
Wide driver_numerator(Money fee, const DriverEconomics& d, Combinator comb) {
  const Weight win = combine(comb, d.beta_id, d.beta_idw);
  const Weight opp = combine(comb, d.beta_od, d.beta_ld);
  const Wide inner =
      (Wide(fee.cents()) - d.d_v.cents() - d.d_f.cents()) * kE18 -
      Wide(opp.units) * d.psi_od.cents();
  const Wide n = Wide(win.units) * inner;
  return n < 0 ? Wide(0) : n;
}

}  // namespace

void DriverEconomics::validate() const {
  if (d_v < Money::zero() || d_f < Money::zero()) {
    fail(ErrorKind::InvalidParameter, "driver costs must be non-negative");
  }
}

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::Po1: return "P_o1";
    case Branch::Po2: return "P_o2";
    case Branch::Single: return "single";
  }
  return "?";
}

ClearingResult clearing_price(MechanismType type, Money cap, Money winning_bid,
                              Money base, Money standard) {
  const Money zero = Money::zero();
  switch (type) {
    case MechanismType::T1:
    case MechanismType::T4: {
      const Money inner = max(zero, max(winning_bid, base));
      if (cap >= max(base, winning_bid)) {
        return {min(cap, inner), Branch::Po1, true};
      }
      return {inner, Branch::Po2, false};
    }
    case MechanismType::T2: {
      const Money p = min(cap, max(base, max(zero, winning_bid)));
      return {p, Branch::Single, winning_bid <= p};
    }
    case MechanismType::T3:
    case MechanismType::T5: {
      const Money p =
          min(cap, max(max(winning_bid, standard), max(zero, base)));
      return {p, Branch::Single, winning_bid <= p};
    }
  }
  fail(ErrorKind::InvalidParameter, "unknown mechanism type");
}

Money compute_base_price(const PlatformEconomics& econ, Fraction expected_fee_split,
                         Money brand_subsidy) {
  if (brand_subsidy < Money::zero()) {
    fail(ErrorKind::InvalidParameter, "brand subsidy must be non-negative");
  }
  const Wide costs = Wide(econ.beta_f.cents()) + econ.beta_v.cents();
  const Wide third = Wide(econ.third_party_fee.cents());
  const Wide keep = kE9 - expected_fee_split.ppb();  // (1 - s) in ppb
  const Wide net = kE9 - econ.taxes_rate.ppb();      // (1 - t) in ppb
  Money p = Money::zero();
  if (costs == 0 && third == 0) {
    p = Money::zero();
  } else if (keep <= 0 || net <= 0) {
    p = Money::zero();  // no price breaks even; degenerate economics
  } else {
    // (1-s) * (p(1-t) - q) >= C  <=>  p >= (C + (1-s) q) / ((1-s)(1-t))
    const Wide num = costs * kE18 + keep * third * kE9;
    const Wide den = keep * net;
    p = Money::cents(ceil_div(num, den).convert_to<std::int64_t>());
  }
  const Money floored = p - brand_subsidy;
  return floored < Money::zero() ? Money::zero() : floored;
}

Money compute_driver_fee(Money gross, Money taxes, Money third_party,
                         const PricingParams& params) {
  const Money net = gross - taxes - third_party;
  if (net < Money::zero()) {
    fail(ErrorKind::InfeasibleFee,
         "taxes and third-party fees exceed the gross fare");
  }
  return min(apply_fraction(net, params.blackcar_payout_fraction),
             apply_fraction(net, params.payout_fraction));
}

Money platform_payoff(Money price, Money driver_fee, const PlatformEconomics& econ,
                      Combinator comb) {
  return round_half_up(platform_numerator(price, driver_fee, econ, comb), kE18);
}

Money driver_payoff(Money driver_fee, const DriverEconomics& d, Combinator comb) {
  if (driver_fee <= Money::zero()) return Money::zero();
  return round_half_up(driver_numerator(driver_fee, d, comb), kE36);
}

long double platform_payoff_value(Money price, Money driver_fee,
                                  const PlatformEconomics& econ, Combinator comb) {
  return to_real(platform_numerator(price, driver_fee, econ, comb), kE18);
}

long double driver_payoff_value(Money driver_fee, const DriverEconomics& d,
                                Combinator comb) {
  if (driver_fee <= Money::zero()) return 0.0L;
  return to_real(driver_numerator(driver_fee, d, comb), kE36);
}

PayoffResult evaluate_ride(MechanismType type, Money cap,
                           std::optional<Money> winning_bid, Money base,
                           Money standard, const PricingParams& params,
                           const PlatformEconomics& econ,
                           const DriverEconomics& driver, Combinator comb) {
  PayoffResult r;
  if (!winning_bid) return r;
  const ClearingResult c = clearing_price(type, cap, *winning_bid, base, standard);
  r.clearing_price = c.price;
  r.branch = c.branch;
  r.feasible_trade = c.feasible;
  if (!c.feasible) return r;
  r.taxes = apply_fraction(c.price, econ.taxes_rate);
  r.third_party = min(econ.third_party_fee, c.price - r.taxes);
  r.driver_fee = compute_driver_fee(c.price, r.taxes, r.third_party, params);
  r.platform_payoff = platform_payoff(c.price, r.driver_fee, econ, comb);
  r.driver_payoff = driver_payoff(r.driver_fee, driver, comb);
  return r;
}

}  // namespace bidride
