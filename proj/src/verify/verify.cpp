#include "verify/verify.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "core/ledger.hpp"
#include "payoffs/payoffs.hpp"

namespace bidride {

void SmallInstance::validate() const {
  const int n = static_cast<int>(drivers.size());
  if (n > kMaxVerifyDrivers)
    fail(ErrorKind::Refused, "instance has " + std::to_string(n) + " drivers; at most " +
                                 std::to_string(kMaxVerifyDrivers) + " can be enumerated");
  if (n < 2) fail(ErrorKind::Refused, "instance needs at least 2 drivers, has " + std::to_string(n));
  for (int i = 0; i < n; ++i) {
    const auto& d = drivers[static_cast<std::size_t>(i)];
    if (d.levels.empty())
      fail(ErrorKind::Refused, "driver " + std::to_string(i) + " has an empty bid grid");
    const std::size_t acts = d.levels.size() + (allow_no_bid ? 1 : 0);
    if (acts > static_cast<std::size_t>(kMaxVerifyLevels))
      fail(ErrorKind::Refused, "driver " + std::to_string(i) + " has " + std::to_string(acts) +
                                   " actions; at most " + std::to_string(kMaxVerifyLevels) +
                                   " can be enumerated");
    if (d.cost < Money::zero())
      fail(ErrorKind::InvalidParameter, "driver " + std::to_string(i) + " cost is negative");
    if (d.eta < 0) fail(ErrorKind::InvalidParameter, "driver " + std::to_string(i) + " eta is negative");
    for (Money l : d.levels)
      if (l < Money::zero())
        fail(ErrorKind::InvalidParameter, "driver " + std::to_string(i) + " has a negative level");
  }
  if (valuation < Money::zero()) fail(ErrorKind::InvalidParameter, "valuation is negative");
  if (standard <= Money::zero()) fail(ErrorKind::InvalidParameter, "standard price must be positive");
  if (base < Money::zero()) fail(ErrorKind::InvalidParameter, "base price is negative");
  if (restarts < 1) fail(ErrorKind::InvalidParameter, "restarts must be at least 1");
  if (max_rounds < 1) fail(ErrorKind::InvalidParameter, "max_rounds must be at least 1");
  params.validate();
  economics.validate();
  validate_customer_bid(type, quote(), customer_bid, params);
}

namespace {

std::size_t parties(const SmallInstance& inst) { return 2 + inst.drivers.size(); }

int actions(const SmallInstance& inst, const SmallDriver& d) {
  return static_cast<int>(d.levels.size()) + (inst.allow_no_bid ? 1 : 0);
}

std::optional<Money> bid_of(const SmallInstance& inst, std::size_t i, int action) {
  const auto& d = inst.drivers[i];
  if (action >= static_cast<int>(d.levels.size())) return std::nullopt;
  return d.levels[static_cast<std::size_t>(action)];
}

std::vector<std::optional<Money>> bids_of(const SmallInstance& inst, const Profile& p) {
  std::vector<std::optional<Money>> out;
  for (std::size_t i = 0; i < inst.drivers.size(); ++i) out.push_back(bid_of(inst, i, p[i]));
  return out;
}

CustomerBid bid_with_cap(const SmallInstance& inst, Money cap) {
  if (inst.type == MechanismType::T1) return CustomerBid::range(min(inst.customer_bid.low, cap), cap);
  return CustomerBid::single(cap);
}

bool valid_cap(const SmallInstance& inst, Money cap) {
  try {
    validate_customer_bid(inst.type, inst.quote(), bid_with_cap(inst, cap), inst.params);
    return true;
  } catch (const Error&) {
    return false;
  }
}

Money truthful_cap(const SmallInstance& inst) {
  switch (inst.type) {
    case MechanismType::T2: return min(inst.valuation, inst.standard);
    case MechanismType::T4: return min(inst.valuation, flex_band(inst.standard, inst.params.flex_band).hi);
    default: return inst.valuation;
  }
}

// Customer reports considered for buyer properties: truthful (when valid),
// the standing bid, and the listed alternatives.
std::vector<Money> customer_options(const SmallInstance& inst) {
  std::vector<Money> out;
  auto push = [&](Money c) {
    if (valid_cap(inst, c) && std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  };
  push(truthful_cap(inst));
  push(inst.customer_bid.cap);
  for (Money c : inst.customer_caps) push(c);
  return out;
}

// Calls f(profile) for every profile, first driver varying slowest.
template <typename F>
void for_each_profile(const SmallInstance& inst, F&& f) {
  const std::size_t n = inst.drivers.size();
  Profile p(n, 0);
  while (true) {
    f(p);
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++p[k] < actions(inst, inst.drivers[k])) break;
      p[k] = 0;
      if (k == 0) return;
    }
  }
}

struct Terms {
  Money taxes;
  Money third;
  Money fee;
};

Terms terms_at(const SmallInstance& inst, Money price) {
  Terms t;
  t.taxes = apply_fraction(price, inst.economics.taxes_rate);
  t.third = min(inst.economics.third_party_fee, price - t.taxes);
  t.fee = compute_driver_fee(price, t.taxes, t.third, inst.params);
  return t;
}

// Utilities of an allocation without no-bid fees.
std::vector<Money> allocation_utilities(const SmallInstance& inst, const Allocation& a) {
  std::vector<Money> u(parties(inst), Money::zero());
  if (!a.driver) return u;
  const Terms t = terms_at(inst, a.price);
  u[kCustomerParty] = inst.valuation - a.price;
  u[kPlatformParty] = a.price - t.taxes - t.third - t.fee - inst.economics.platform_cost();
  u[2 + static_cast<std::size_t>(*a.driver)] =
      t.fee - inst.drivers[static_cast<std::size_t>(*a.driver)].cost;
  return u;
}

Money total(const std::vector<Money>& u) {
  Money s = Money::zero();
  for (Money m : u) s += m;
  return s;
}

}  // namespace

Outcome evaluate_outcome(const SmallInstance& inst, Money customer_cap,
                         const std::vector<std::optional<Money>>& bids) {
  Outcome o;
  o.utilities.assign(parties(inst), Money::zero());
  if (!valid_cap(inst, customer_cap)) return o;
  const CustomerBid cb = bid_with_cap(inst, customer_cap);
  const Interval admissible = admissible_bid_interval(inst.type, inst.quote(), cb, inst.params);
  std::vector<RankedBid> cands;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (!bids[i]) {
      if (inst.params.charge_no_bid_fee) {
        o.utilities[2 + i] -= inst.params.no_bid_fee;
        o.utilities[kPlatformParty] += inst.params.no_bid_fee;
      }
      continue;
    }
    if (!admissible.contains(*bids[i])) continue;
    const auto& d = inst.drivers[i];
    cands.push_back({DriverId(static_cast<std::int64_t>(i)), *bids[i], d.eta, d.quality});
  }
  const auto ranked = rank_bids(inst.type, customer_cap, std::move(cands));
  if (ranked.empty()) return o;
  const ClearingResult c =
      clearing_price(inst.type, customer_cap, ranked.front().price, inst.base, inst.standard);
  if (!c.feasible) return o;
  const auto w = static_cast<int>(ranked.front().driver.value);
  const auto base = allocation_utilities(inst, {w, c.price});
  for (std::size_t k = 0; k < base.size(); ++k) o.utilities[k] += base[k];
  const Terms t = terms_at(inst, c.price);
  o.winner = w;
  o.price = c.price;
  o.driver_fee = t.fee;
  o.taxes = t.taxes;
  o.third_party = t.third;
  SettlementTerms st;
  st.ride_payment = c.price;
  st.driver_fee = t.fee;
  st.taxes = t.taxes;
  st.third_party = t.third;
  o.balanced = settle(st).balanced();
  return o;
}

Outcome evaluate_profile(const SmallInstance& inst, const Profile& p) {
  return evaluate_outcome(inst, inst.customer_bid.cap, bids_of(inst, p));
}

std::vector<Profile> enumerate_pure_nash(const SmallInstance& inst) {
  inst.validate();
  std::vector<Profile> out;
  for_each_profile(inst, [&](const Profile& p) {
    const Outcome base = evaluate_profile(inst, p);
    for (std::size_t i = 0; i < inst.drivers.size(); ++i) {
      Profile q = p;
      for (int a = 0; a < actions(inst, inst.drivers[i]); ++a) {
        if (a == p[i]) continue;
        q[i] = a;
        if (evaluate_profile(inst, q).utilities[2 + i] > base.utilities[2 + i]) return;
      }
    }
    out.push_back(p);
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<RestartResult> best_response_dynamics(const SmallInstance& inst) {
  inst.validate();
  std::mt19937_64 rng(inst.seed);
  std::vector<RestartResult> out;
  const std::size_t n = inst.drivers.size();
  for (int r = 0; r < inst.restarts; ++r) {
    RestartResult res;
    Profile p(n);
    for (std::size_t i = 0; i < n; ++i)
      p[i] = static_cast<int>(rng() % static_cast<std::uint64_t>(actions(inst, inst.drivers[i])));
    res.start = p;
    for (int round = 1; round <= inst.max_rounds; ++round) {
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        const Money cur = evaluate_profile(inst, p).utilities[2 + i];
        Profile q = p;
        for (int a = 0; a < actions(inst, inst.drivers[i]); ++a) {
          if (a == p[i]) continue;
          q[i] = a;
          if (evaluate_profile(inst, q).utilities[2 + i] > cur) {
            p = q;
            changed = true;
            break;
          }
        }
      }
      if (!changed) {
        res.fixed_point = p;
        res.rounds = round;
        break;
      }
    }
    if (!res.fixed_point) res.rounds = inst.max_rounds;
    out.push_back(std::move(res));
  }
  return out;
}

std::vector<Profile> find_fixed_points(const SmallInstance& inst) {
  std::set<Profile> seen;
  for (const auto& r : best_response_dynamics(inst))
    if (r.fixed_point) seen.insert(*r.fixed_point);
  return {seen.begin(), seen.end()};
}

PropertyReport check_properties(const SmallInstance& inst) {
  inst.validate();
  PropertyReport rep;
  const std::size_t n = inst.drivers.size();
  const auto options = customer_options(inst);
  std::int64_t count = 1;
  for (const auto& d : inst.drivers) count *= actions(inst, d);
  rep.profiles_enumerated = count;

  // Buyer IR: some report keeps the customer at or above zero against every
  // driver profile.
  {
    bool found = false;
    std::optional<Witness> first_fail;
    for (Money cap : options) {
      bool ok = true;
      for_each_profile(inst, [&](const Profile& p) {
        if (!ok) return;
        if (evaluate_outcome(inst, cap, bids_of(inst, p)).utilities[kCustomerParty] < Money::zero()) {
          ok = false;
          if (!first_fail) first_fail = Witness{kCustomerParty, p, cap, std::nullopt, "negative buyer utility"};
        }
      });
      if (ok) {
        found = true;
        break;
      }
    }
    rep.ir_buyer = found || options.empty();
    if (!rep.ir_buyer) rep.ir_buyer_witness = first_fail;
  }

  // Seller IR: per driver, some action is non-negative against every profile
  // of the others.
  for (std::size_t i = 0; i < n && rep.ir_seller; ++i) {
    std::optional<Witness> best_fail;
    Money best_worst = Money::cents(std::numeric_limits<std::int64_t>::min());
    bool found = false;
    for (int a = 0; a < actions(inst, inst.drivers[i]) && !found; ++a) {
      Money worst = Money::cents(std::numeric_limits<std::int64_t>::max());
      Profile worst_at;
      for_each_profile(inst, [&](const Profile& p) {
        if (p[i] != a) return;
        const Money u = evaluate_profile(inst, p).utilities[2 + i];
        if (u < worst) {
          worst = u;
          worst_at = p;
        }
      });
      if (worst >= Money::zero()) {
        found = true;
      } else if (worst > best_worst) {
        best_worst = worst;
        best_fail = Witness{static_cast<int>(2 + i), worst_at, inst.customer_bid.cap, std::nullopt,
                            "every action can lose money"};
      }
    }
    if (!found) {
      rep.ir_seller = false;
      rep.ir_seller_witness = best_fail;
    }
  }

  // Strong budget balance on every outcome.
  for (Money cap : options) {
    if (!rep.sbb) break;
    for_each_profile(inst, [&](const Profile& p) {
      if (!rep.sbb) return;
      if (!evaluate_outcome(inst, cap, bids_of(inst, p)).balanced) {
        rep.sbb = false;
        rep.sbb_witness = Witness{kPlatformParty, p, cap, std::nullopt, "ledger does not balance"};
      }
    });
  }

  // DSIC gap: best gain over the truthful report, drivers reporting their
  // cost and the customer its valuation.
  rep.dsic_gap = Money::zero();
  for (std::size_t i = 0; i < n; ++i) {
    for_each_profile(inst, [&](const Profile& p) {
      if (p[i] != 0) return;  // enumerate others once
      auto bids = bids_of(inst, p);
      bids[i] = inst.drivers[i].cost;
      const Money truth = evaluate_outcome(inst, inst.customer_bid.cap, bids).utilities[2 + i];
      for (int a = 0; a < actions(inst, inst.drivers[i]); ++a) {
        bids[i] = bid_of(inst, i, a);
        const Money gain = evaluate_outcome(inst, inst.customer_bid.cap, bids).utilities[2 + i] - truth;
        if (gain > rep.dsic_gap) {
          rep.dsic_gap = gain;
          Profile w = p;
          w[i] = a;
          rep.dsic_witness = Witness{static_cast<int>(2 + i), w, inst.customer_bid.cap,
                                     bid_of(inst, i, a), "driver gains by misreporting"};
        }
      }
    });
  }
  const Money truthful = truthful_cap(inst);
  if (valid_cap(inst, truthful)) {
    for_each_profile(inst, [&](const Profile& p) {
      const auto bids = bids_of(inst, p);
      const Money truth = evaluate_outcome(inst, truthful, bids).utilities[kCustomerParty];
      for (Money cap : options) {
        const Money gain = evaluate_outcome(inst, cap, bids).utilities[kCustomerParty] - truth;
        if (gain > rep.dsic_gap) {
          rep.dsic_gap = gain;
          rep.dsic_witness = Witness{kCustomerParty, p, truthful, cap, "customer gains by misreporting"};
        }
      }
    });
  }

  // Truthful outcome, then Pareto and welfare against candidate allocations.
  std::vector<std::optional<Money>> truth_bids;
  for (const auto& d : inst.drivers) truth_bids.push_back(d.cost);
  const Money cap_for_truth = valid_cap(inst, truthful) ? truthful : inst.customer_bid.cap;
  const Outcome t = evaluate_outcome(inst, cap_for_truth, truth_bids);
  rep.truthful_allocation = t.winner ? Allocation{t.winner, t.price} : Allocation{};
  rep.realized_welfare = total(t.utilities);

  std::set<Money> prices = {inst.base, inst.standard, cap_for_truth, inst.customer_bid.cap};
  if (t.winner) prices.insert(t.price);
  for (Money c : options) prices.insert(c);
  for (const auto& d : inst.drivers) {
    prices.insert(d.cost);
    for (Money l : d.levels) prices.insert(l);
  }
  std::vector<Allocation> alts = {Allocation{}};
  for (std::size_t j = 0; j < n; ++j)
    for (Money q : prices)
      if (q >= Money::zero()) alts.push_back({static_cast<int>(j), q});

  rep.max_welfare = Money::zero();
  for (const Allocation& a : alts) {
    const auto u = allocation_utilities(inst, a);
    rep.max_welfare = max(rep.max_welfare, total(u));
    if (rep.pareto_dominating) continue;
    bool weak = true, strict = false;
    for (std::size_t k = 0; k < u.size(); ++k) {
      if (u[k] < t.utilities[k]) weak = false;
      if (u[k] > t.utilities[k]) strict = true;
    }
    if (weak && strict) rep.pareto_dominating = a;
  }
  rep.pareto = !rep.pareto_dominating;
  if (rep.max_welfare > Money::zero())
    rep.welfare_ratio = static_cast<double>(rep.realized_welfare.cents()) /
                        static_cast<double>(rep.max_welfare.cents());
  else
    rep.welfare_ratio = rep.realized_welfare == rep.max_welfare ? 1.0 : 0.0;

  rep.restarts = best_response_dynamics(inst);
  std::set<Profile> fps;
  for (const auto& r : rep.restarts)
    if (r.fixed_point) fps.insert(*r.fixed_point);
  rep.fixed_points.assign(fps.begin(), fps.end());
  rep.pure_nash = enumerate_pure_nash(inst);
  rep.unique_pure_nash = rep.pure_nash.size() == 1;
  return rep;
}

}  // namespace bidride
