#include "agents/agents.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "integrity/gps.hpp"

namespace bidride {

double distance_km(GeoPoint a, GeoPoint b) { return haversine_km(a.lat, a.lon, b.lat, b.lon); }

Seconds travel_time(GeoPoint a, GeoPoint b, double speed_kmh) {
  if (!(speed_kmh > 0.0)) fail(ErrorKind::InvalidParameter, "speed must be positive");
  return static_cast<Seconds>(std::ceil(distance_km(a, b) / speed_kmh * 3600.0 - 1e-9));
}

void DriverProfile::validate() const {
  if (!(quality >= 0.0 && quality <= 1.0))
    fail(ErrorKind::InvalidParameter, "driver quality must lie in [0, 1]");
  if (!(speed_kmh > 0.0)) fail(ErrorKind::InvalidParameter, "driver speed must be positive");
  if (cost_per_km < Money::zero() || fixed_cost < Money::zero() || margin < Money::zero())
    fail(ErrorKind::InvalidParameter, "driver costs and margin must be non-negative");
  if (!(auto_rate >= 0.0 && auto_rate <= 1.0))
    fail(ErrorKind::InvalidParameter, "auto_rate must lie in [0, 1]");
  if (beliefs.psi_od < Money::zero())
    fail(ErrorKind::InvalidParameter, "opportunity profit belief is negative");
}

DriverEconomics ride_economics(const DriverProfile& p, double ride_km, Probability beta_ld) {
  DriverEconomics e;
  e.d_v = Money::cents(std::llround(static_cast<double>(p.cost_per_km.cents()) *
                                    std::max(ride_km, 0.0)));
  e.d_f = p.fixed_cost;
  e.psi_od = p.beliefs.psi_od;
  e.beta_od = p.beliefs.beta_od;
  e.beta_ld = beta_ld;
  return e;
}

namespace {

const Money kCent = Money::cents(1);

Money ceil_div(Money m, std::int64_t k) { return Money::cents((m.cents() + k - 1) / k); }

}  // namespace

std::optional<CustomerProposal> propose_customer_bid(const CustomerRequest& request,
                                                     const PriceQuote& quote,
                                                     MechanismType type,
                                                     const PricingParams& params) {
  const Money v = request.valuation;
  if (v <= Money::zero()) return std::nullopt;
  const Money sv = apply_fraction(v, request.policy.shade);
  const Money floor = max(quote.base, Money::zero());
  CustomerProposal out;
  switch (type) {
    case MechanismType::T1: {
      if (sv <= floor) return std::nullopt;
      const Money lo = max(apply_fraction(sv, request.policy.alpha), floor + kCent);
      out.bid = CustomerBid::range(min(lo, sv), sv);
      break;
    }
    case MechanismType::T2: {
      if (quote.standard <= floor) return std::nullopt;
      out.bid = CustomerBid::single(quote.standard);
      if (sv < quote.standard) {
        if (sv <= floor) return std::nullopt;
        out.revision = CustomerBid::single(sv);
      }
      break;
    }
    case MechanismType::T3: {
      const Money c = max(max(sv, quote.standard + kCent), floor + kCent);
      if (c > v) return std::nullopt;
      out.bid = CustomerBid::single(c);
      break;
    }
    case MechanismType::T4: {
      const Interval band = flex_band(quote.standard, params.flex_band);
      if (sv < band.lo) return std::nullopt;
      const Money c = min(sv, band.hi);
      if (c <= floor) return std::nullopt;
      out.bid = CustomerBid::single(c);
      break;
    }
    case MechanismType::T5: {
      if (sv <= floor) return std::nullopt;
      out.bid = CustomerBid::single(sv);
      break;
    }
  }
  return out;
}

std::optional<CustomerBid> next_customer_revision(const CustomerRequest& request,
                                                  const AuctionState& state) {
  if (state.type == MechanismType::T2 || state.type == MechanismType::T4) return std::nullopt;
  const int remaining = revision_limit(state.type) - state.customer_bid.revision_count;
  if (remaining <= 0) return std::nullopt;
  const CustomerBid& cur = state.customer_bid;
  if (cur.cap >= request.valuation) return std::nullopt;
  CustomerBid next = cur;
  next.cap = cur.cap + ceil_div(request.valuation - cur.cap, remaining);
  return next;
}

Probability opportunity_likelihood(Money cap, std::span<const ConcurrentOpportunity> others) {
  if (others.empty()) return Probability::zero();
  std::int64_t higher = 0;
  for (const auto& o : others)
    if (o.cap > cap) ++higher;
  return Probability::from_ppb(static_cast<std::int64_t>(
      div_round_half_up(static_cast<__int128>(higher) * Probability::kScale,
                        static_cast<__int128>(others.size()))));
}

Money break_even(const DriverEconomics& e, Combinator comb) {
  const Weight w = combine(comb, e.beta_od, e.beta_ld);
  const __int128 opp =
      div_round_half_up(static_cast<__int128>(w.units) * e.psi_od.cents(), Weight::kScale);
  return e.d_v + e.d_f + Money::cents(static_cast<std::int64_t>(opp));
}

std::optional<Money> implied_price(const DriverPreference& pref, const AuctionView& view) {
  const CustomerBid& c = view.customer_bid;
  switch (pref.action) {
    case BidAction::Manual:
      return pref.manual_price;
    case BidAction::AutoMidpoint:
      return Money::cents(static_cast<std::int64_t>(
          div_round_half_up(static_cast<__int128>(c.low.cents()) + c.cap.cents(), 2)));
    case BidAction::AcceptStandard:
      return view.quote.standard;
    case BidAction::AcceptCustomerPrice:
      return c.cap;
    case BidAction::FractionOfPriority: {
      if (!pref.preset_fraction) return std::nullopt;
      const Fraction f = *pref.preset_fraction;
      if (f < Fraction::from_ppb(700'000'000) || f > Fraction::from_ppb(990'000'000))
        return std::nullopt;
      const Money p = apply_fraction(c.cap, f);
      if (p <= view.quote.standard) return std::nullopt;
      return p;
    }
    case BidAction::FractionOfStandard:
      if (!pref.preset_fraction) return std::nullopt;
      return apply_fraction(view.quote.standard, *pref.preset_fraction);
    case BidAction::NoBid:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<DriverPreference> choose_driver_action(
    const DriverProfile& profile, const AuctionView& view,
    std::span<const ConcurrentOpportunity> concurrent, double u, bool locked_out,
    Combinator comb) {
  if (locked_out) return std::nullopt;
  const Probability beta_ld = opportunity_likelihood(view.customer_bid.cap, concurrent);
  const DriverEconomics econ =
      ride_economics(profile, view.ride_km + view.pickup_km, beta_ld);
  const Money be = break_even(econ, comb);

  Money top = view.admissible.hi;
  switch (view.type) {
    case MechanismType::T1:
    case MechanismType::T4:
      top = min(top, view.customer_bid.cap);
      break;
    case MechanismType::T5:
      top = min(top, view.customer_bid.cap - kCent);
      break;
    default:
      break;
  }
  const Money lo = view.admissible.lo;
  if (top < lo || top < be) return DriverPreference::no_bid();

  if (u < profile.auto_rate) {
    std::vector<DriverPreference> autos;
    switch (view.type) {
      case MechanismType::T1:
        autos.push_back(DriverPreference::automatic(BidAction::AutoMidpoint));
        break;
      case MechanismType::T2:
        autos.push_back(DriverPreference::automatic(BidAction::AcceptStandard));
        break;
      case MechanismType::T3:
        autos.push_back(DriverPreference::with_fraction(BidAction::FractionOfPriority,
                                                        profile.priority_fraction));
        autos.push_back(DriverPreference::automatic(BidAction::AcceptStandard));
        autos.push_back(DriverPreference::automatic(BidAction::AcceptCustomerPrice));
        break;
      case MechanismType::T5:
        autos.push_back(DriverPreference::with_fraction(BidAction::FractionOfPriority,
                                                        profile.priority_fraction));
        autos.push_back(DriverPreference::automatic(BidAction::AcceptStandard));
        break;
      case MechanismType::T4:
        autos.push_back(DriverPreference::automatic(BidAction::AcceptCustomerPrice));
        autos.push_back(DriverPreference::with_fraction(BidAction::FractionOfStandard,
                                                        profile.standard_fraction));
        autos.push_back(DriverPreference::automatic(BidAction::AcceptStandard));
        break;
    }
    for (const DriverPreference& p : autos) {
      const auto price = implied_price(p, view);
      if (price && view.admissible.contains(*price) && *price >= be && *price <= top)
        return p;
    }
  }
  const Money target = be + profile.margin;
  return DriverPreference::manual(std::clamp(target, max(lo, be), top));
}

Beliefs update_beliefs(Beliefs b, std::span<const BeliefObservation> window, Fraction lambda) {
  if (lambda > Fraction::from_ppb(Fraction::kScale))
    fail(ErrorKind::InvalidParameter, "learning rate exceeds 1");
  const __int128 l = lambda.ppb();
  const __int128 keep = Fraction::kScale - l;
  for (const BeliefObservation& o : window) {
    const Money alt = max(o.alternative_profit, Money::zero());
    b.psi_od = Money::cents(static_cast<std::int64_t>(div_round_half_up(
        keep * b.psi_od.cents() + l * alt.cents(), Fraction::kScale)));
    const __int128 won = o.won ? Probability::kScale : 0;
    b.beta_od = Probability::from_ppb(static_cast<std::int64_t>(
        div_round_half_up(keep * b.beta_od.ppb() + l * won, Fraction::kScale)));
  }
  return b;
}

}  // namespace bidride
