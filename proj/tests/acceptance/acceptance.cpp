#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "instance_family.hpp"
#include "integrity/collusion.hpp"
#include "integrity/gps.hpp"
#include "payoff_oracle.hpp"
#include "payoffs/payoffs.hpp"
#include "reference_verifier.hpp"
#include "report/report.hpp"
#include "sim/engine.hpp"
#include "sim/privacy.hpp"
#include "sim/scenario.hpp"
#include "synthetic_logs.hpp"
#include "verify/verify.hpp"

using namespace bidride;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

Money c(std::int64_t v) { return Money::cents(v); }

std::string source_path(const std::string& rel) { return std::string(BIDRIDE_SOURCE_DIR) + "/" + rel; }

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared simulation corpus

Scenario type_scenario(MechanismType t, std::uint64_t seed) {
  Scenario s;
  s.seed = seed;
  s.duration = hours(8);
  s.fleet.drivers = 150;
  s.demand.arrivals_per_hour = 300;
  s.demand.multi_open_probability = 0.15;
  s.mechanism_mix = {0, 0, 0, 0, 0};
  s.mechanism_mix[static_cast<std::size_t>(index_of(t))] = 1.0;
  return s;
}

Scenario large_mixed_scenario() {
  Scenario s;
  s.seed = 2024;
  s.duration = hours(24);
  s.fleet.drivers = 600;
  s.demand.arrivals_per_hour = 700;
  s.demand.multi_open_probability = 0.1;
  s.mechanism_mix = {0.2, 0.2, 0.2, 0.2, 0.2};
  return s;
}

struct Corpus {
  std::array<std::vector<RunResult>, 5> per_type;
  std::array<std::int64_t, 5> auctions{};
  RunResult large;
  std::vector<std::string> failures;
};

const Corpus& corpus() {
  static const Corpus built = [] {
    Corpus k;
    for (MechanismType t : kAllMechanisms) {
      const auto i = static_cast<std::size_t>(index_of(t));
      for (std::uint64_t seed = 1; k.auctions[i] < 10'000 && seed < 1000; ++seed) {
        RunResult r = run(type_scenario(t, seed));
        if (!r.ok()) k.failures.push_back(std::string(to_string(t)) + " seed " + std::to_string(seed) +
                                          ": " + r.failure->message);
        k.auctions[i] += static_cast<std::int64_t>(r.auctions.size());
        k.per_type[i].push_back(std::move(r));
      }
    }
    k.large = run(large_mixed_scenario());
    if (!k.large.ok()) k.failures.push_back("large run: " + k.large.failure->message);
    return k;
  }();
  return built;
}

void for_each_run(const std::function<void(const RunResult&)>& f) {
  const Corpus& k = corpus();
  for (const auto& runs : k.per_type)
    for (const auto& r : runs) f(r);
  f(k.large);
}

// ---------------------------------------------------------------------------
// 1. Payoff oracle equivalence

oracle::Comb to_oracle(Combinator c) {
  switch (c) {
    case Combinator::Product: return oracle::Comb::Product;
    case Combinator::Min: return oracle::Comb::Min;
    case Combinator::Left: return oracle::Comb::Left;
  }
  return oracle::Comb::Product;
}

Verdict payoff_oracle() {
  std::mt19937_64 rng(0xacce55);
  auto u = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  std::int64_t mismatches = 0, draws = 0;
  long double worst = 0;
  std::string first;
  auto miss = [&](const std::string& what) {
    if (mismatches++ == 0) first = what;
  };
  for (MechanismType t : kAllMechanisms) {
    const int type = static_cast<int>(t);
    for (int i = 0; i < 10'000; ++i, ++draws) {
      const std::int64_t cap = u(0, 5000), w = u(0, 5000), base = u(0, 2500), std_ = u(1, 5000);
      const ClearingResult got = clearing_price(t, c(cap), c(w), c(base), c(std_));
      const oracle::ClearingTree want = oracle::clearing_tree(type, cap, w, base, std_);
      if (got.price.cents() != oracle::round_half_up(oracle::eval(want.price)) ||
          got.feasible != want.feasible ||
          ((t == MechanismType::T1 || t == MechanismType::T4) && (got.branch == Branch::Po1) != want.po1))
        miss(fmt("clearing %s cap=%lld w=%lld", std::string(to_string(t)).c_str(), (long long)cap, (long long)w));

      const Combinator comb = static_cast<Combinator>(u(0, 2));
      PricingParams params = PricingParams::defaults_for(t);
      params.payout_fraction = Fraction::from_ppb(u(500'000'000, 950'000'000));
      params.blackcar_payout_fraction = Fraction::from_ppb(u(500'000'000, 950'000'000));
      PlatformEconomics econ;
      econ.beta_v = c(u(0, 300));
      econ.beta_f = c(u(0, 300));
      econ.psi_ob = c(u(0, 800));
      econ.beta_ob = Probability::from_ppb(u(0, 1'000'000'000));
      econ.beta_lb = Probability::from_ppb(u(0, 1'000'000'000));
      econ.beta_id = Probability::from_ppb(u(0, 1'000'000'000));
      const Money price = got.price;
      const Money taxes = apply_fraction(price, Fraction::from_ppb(u(0, 150'000'000)));
      const Money third = min(c(u(0, 100)), price - taxes);
      const Money fee = compute_driver_fee(price, taxes, third, params);
      const std::int64_t want_fee =
          oracle::driver_fee(price.cents(), taxes.cents(), third.cents(),
                             params.blackcar_payout_fraction.ppb(), params.payout_fraction.ppb());
      if (fee.cents() != want_fee) miss("driver fee");

      const oracle::Rational po = oracle::eval(oracle::platform_tree(
          {price.cents(), fee.cents(), econ.beta_v.cents(), econ.beta_f.cents(), econ.psi_ob.cents(),
           econ.beta_ob.ppb(), econ.beta_lb.ppb(), econ.beta_id.ppb()},
          to_oracle(comb)));
      if (platform_payoff(price, fee, econ, comb).cents() != oracle::round_half_up(po))
        miss("platform payoff rounding");
      const long double po_err =
          std::fabs(platform_payoff_value(price, fee, econ, comb) - po.convert_to<long double>());
      worst = std::max(worst, po_err);
      if (po_err > 1e-9L) miss("platform payoff value");

      DriverEconomics d;
      d.d_v = c(u(0, 1500));
      d.d_f = c(u(0, 300));
      d.psi_od = c(u(0, 800));
      d.beta_od = Probability::from_ppb(u(0, 1'000'000'000));
      d.beta_ld = Probability::from_ppb(u(0, 1'000'000'000));
      d.beta_id = Probability::from_ppb(u(0, 1'000'000'000));
      d.beta_idw = Probability::from_ppb(u(0, 1'000'000'000));
      const oracle::Rational ps = oracle::eval(oracle::driver_tree(
          {fee.cents(), d.d_v.cents(), d.d_f.cents(), d.psi_od.cents(), d.beta_od.ppb(), d.beta_ld.ppb(),
           d.beta_id.ppb(), d.beta_idw.ppb()},
          to_oracle(comb)));
      if (driver_payoff(fee, d, comb).cents() != oracle::round_half_up(ps)) miss("driver payoff rounding");
      const long double ps_err =
          std::fabs(driver_payoff_value(fee, d, comb) - ps.convert_to<long double>());
      worst = std::max(worst, ps_err);
      if (ps_err > 1e-9L) miss("driver payoff value");
    }
  }
  return {mismatches == 0, fmt("%lld draws, %lld mismatches, max real error %.3Le", (long long)draws,
                               (long long)mismatches, worst) +
                               (first.empty() ? "" : ", first: " + first)};
}

// ---------------------------------------------------------------------------
// 2. Ordering and admissibility

std::string check_auction(const AuctionRecord& a, const PricingParams& params) {
  const PriceQuote& q = a.quote;
  const Money lo_cap = min(a.initial_bid.cap, a.final_bid.cap);
  const Money hi_cap = max(a.initial_bid.cap, a.final_bid.cap);
  for (const BidRecord& b : a.bids) {
    if (!b.admissible.contains(b.price)) return "bid outside its interval";
    const Interval want = admissible_bid_interval(a.type, q, a.final_bid, params);
    switch (a.type) {
      case MechanismType::T1:
      case MechanismType::T4:
        if (b.admissible.lo != want.lo || b.admissible.hi != want.hi) return "interval mismatch";
        break;
      default:
        if (b.admissible.lo != q.base || b.admissible.hi < lo_cap || b.admissible.hi > hi_cap)
          return "interval mismatch";
    }
    if (b.price <= Money::zero() && a.type != MechanismType::T2) return "non-positive bid";
  }
  if (!a.clearing_price || !a.winning_bid) return {};
  const Money w = *a.winning_bid, p = *a.clearing_price, cap = a.final_bid.cap;
  const ClearingResult want = clearing_price(a.type, cap, w, q.base, q.standard);
  if (want.price != p) return "clearing price differs from the formula";
  if (!(q.base <= w && w <= p && p <= cap)) return "chain base <= bid <= price <= cap broken";
  switch (a.type) {
    case MechanismType::T1:
      if (want.branch != Branch::Po1) return "T1 trade outside the feasible branch";
      break;
    case MechanismType::T2:
      if (cap > q.standard) return "T2 cap above standard";
      break;
    case MechanismType::T3:
      if (!(q.standard < cap && q.standard <= p)) return "T3 priority chain broken";
      break;
    case MechanismType::T4:
      if (!flex_band(q.standard, params.flex_band).contains(cap)) return "T4 cap outside the band";
      if (want.branch != Branch::Po1) return "T4 trade outside the feasible branch";
      break;
    case MechanismType::T5:
      if (cap >= q.standard && p < q.standard) return "T5 price below standard";
      break;
  }
  return {};
}

Verdict ordering() {
  const Corpus& k = corpus();
  std::array<std::int64_t, 5> auctions{}, trades{}, bids{};
  std::int64_t violations = 0;
  std::string first;
  for (MechanismType t : kAllMechanisms) {
    const auto i = static_cast<std::size_t>(index_of(t));
    for (const RunResult& r : k.per_type[i]) {
      const Scenario s = type_scenario(t, r.seed);
      for (const AuctionRecord& a : r.auctions) {
        ++auctions[i];
        bids[i] += static_cast<std::int64_t>(a.bids.size());
        if (a.clearing_price) ++trades[i];
        const std::string why = check_auction(a, s.pricing_for(t));
        if (!why.empty() && violations++ == 0) first = std::string(to_string(t)) + ": " + why;
      }
    }
  }
  bool enough = true;
  std::string per;
  for (std::size_t i = 0; i < 5; ++i) {
    enough = enough && auctions[i] >= 10'000;
    per += fmt(" T%zu %lld/%lld/%lld", i + 1, (long long)auctions[i], (long long)bids[i], (long long)trades[i]);
  }
  return {enough && violations == 0 && k.failures.empty(),
          fmt("%lld violations; auctions/bids/trades:", (long long)violations) + per +
              (first.empty() ? "" : ", first: " + first) +
              (k.failures.empty() ? "" : ", aborted: " + k.failures.front())};
}

// ---------------------------------------------------------------------------
// 3. Strong budget balance

Verdict budget_balance() {
  std::int64_t rides = 0, unbalanced = 0, discounts = 0, fulfillment = 0, incentives = 0, mismatched = 0;
  for_each_run([&](const RunResult& r) {
    for (const RideOutcome& o : r.rides) {
      ++rides;
      std::int64_t in = 0, out = 0;
      for (const LedgerEntry& e : o.ledger.entries()) {
        if (e.amount < Money::zero()) ++unbalanced;
        (e.direction == Direction::In ? in : out) += e.amount.cents();
      }
      if (in != out) ++unbalanced;
      const SettlementTerms& t = o.guarantees.terms;
      if (o.ledger.total(Reason::RidePayment) != t.ride_payment ||
          o.ledger.total(Reason::FulfillmentFee) != t.fulfillment_fee ||
          o.ledger.total(Reason::DriverFee) != t.driver_fee ||
          o.ledger.total(Reason::IncentiveFee) != t.incentive_fee)
        ++mismatched;
      if (o.guarantees.customer_discount > Money::zero()) ++discounts;
      if (o.guarantees.fulfillment_fee > Money::zero()) ++fulfillment;
      if (o.guarantees.incentive_fee > Money::zero()) ++incentives;
    }
    if (r.ledger.inflow != r.ledger.outflow || r.ledger.unbalanced != 0) ++unbalanced;
  });
  const std::int64_t large = static_cast<std::int64_t>(corpus().large.rides.size());
  return {unbalanced == 0 && mismatched == 0 && large >= 10'000 && discounts > 0 && fulfillment > 0 &&
              incentives > 0,
          fmt("%lld rides (%lld in the single large run), %lld unbalanced, %lld term mismatches; "
              "%lld discounts, %lld fulfillment fees, %lld incentives",
              (long long)rides, (long long)large, (long long)unbalanced, (long long)mismatched,
              (long long)discounts, (long long)fulfillment, (long long)incentives)};
}

// ---------------------------------------------------------------------------
// 4. Individual rationality

Verdict individual_rationality() {
  std::int64_t rides = 0, over_cap = 0, under_bid = 0, negative = 0;
  for_each_run([&](const RunResult& r) {
    if (r.mode != RunMode::Mechanism) return;
    for (const RideOutcome& o : r.rides) {
      ++rides;
      if (o.price > o.cap || o.guarantees.terms.ride_payment > o.cap) ++over_cap;
      if (!o.winning_bid || o.price < *o.winning_bid) ++under_bid;
      if (o.payoff.platform_payoff < Money::zero() || o.payoff.driver_payoff < Money::zero()) ++negative;
    }
  });
  return {over_cap == 0 && under_bid == 0 && negative == 0 && rides > 0,
          fmt("%lld rides: %lld above cap, %lld below the winning bid, %lld negative P_s/P_o",
              (long long)rides, (long long)over_cap, (long long)under_bid, (long long)negative)};
}

// ---------------------------------------------------------------------------
// 5. Collusion detector

Verdict collusion() {
  std::mt19937_64 rng(5150);
  const CollusionParams params;
  int found = 0, unsound = 0;
  for (int i = 0; i < 100; ++i) {
    const synth::BidLog log = synth::planted_bids(rng);
    const auto groups = detect_bid_band_collusion(log.log, params);
    const auto& plant = log.planted.front();
    bool hit = false;
    for (const auto& g : groups) {
      std::set<std::int64_t> ids;
      for (DriverId d : g.drivers) ids.insert(d.value);
      hit = hit || (g.neighborhood == plant.neighborhood && ids == plant.drivers);
      if (!synth::group_satisfies_predicate(log.log, g, params)) ++unsound;
    }
    found += hit ? 1 : 0;
  }
  std::int64_t drivers = 0, flagged_drivers = 0, flagged_logs = 0;
  const int logs = 1000;
  const synth::BidLogSpec spec;
  for (int i = 0; i < logs; ++i) {
    const synth::BidLog log = synth::independent_bids(rng, spec);
    const auto groups = detect_bid_band_collusion(log.log, params);
    std::set<DriverId> flagged;
    for (const auto& g : groups) {
      flagged.insert(g.drivers.begin(), g.drivers.end());
      if (!synth::group_satisfies_predicate(log.log, g, params)) ++unsound;
    }
    drivers += spec.neighborhoods * spec.drivers_per_hood;
    flagged_drivers += static_cast<std::int64_t>(flagged.size());
    flagged_logs += groups.empty() ? 0 : 1;
  }
  const double fpr = static_cast<double>(flagged_drivers) / static_cast<double>(drivers);
  const double log_rate = static_cast<double>(flagged_logs) / logs;
  return {found == 100 && fpr < 0.02 && unsound == 0,
          fmt("recall %d/100, false-positive rate %.4f of independent drivers (%lld/%lld), "
              "%.3f of logs with any flag, %d groups failing the predicate",
              found, fpr, (long long)flagged_drivers, (long long)drivers, log_rate, unsound)};
}

// ---------------------------------------------------------------------------
// 6. Sync-logoff detector

Verdict sync_logoff() {
  std::mt19937_64 rng(6060);
  const Seconds delta = 120;
  std::int64_t pairs = 0, flagged = 0, wrong = 0;
  for (int i = 0; i < 1000; ++i) {
    const synth::LogoffLog log = synth::random_logoffs(rng, delta);
    const auto obs = logoff_observations(log.log);
    std::map<std::int64_t, std::vector<Tick>> by_driver;
    for (const auto& o : obs) by_driver[o.driver.value].push_back(o.tick);
    for (auto& [d, ticks] : by_driver) std::sort(ticks.begin(), ticks.end());
    std::map<std::pair<std::int64_t, std::int64_t>, int> expected;
    for (auto a = by_driver.begin(); a != by_driver.end(); ++a)
      for (auto b = std::next(a); b != by_driver.end(); ++b) {
        ++pairs;
        const int n = synth::max_co_logoffs(a->second, b->second, delta);
        if (n >= 3) expected[{a->first, b->first}] = n;
      }
    std::map<std::pair<std::int64_t, std::int64_t>, int> got;
    for (const auto& p : detect_sync_logoff(obs, {delta, 3})) got[{p.a.value, p.b.value}] = p.occasions;
    flagged += static_cast<std::int64_t>(expected.size());
    if (got != expected) ++wrong;
  }
  return {wrong == 0 && flagged > 0,
          fmt("1000 logs, %lld pairs enumerated, %lld with >= 3 co-logoffs, %lld logs disagreeing",
              (long long)pairs, (long long)flagged, (long long)wrong)};
}

// ---------------------------------------------------------------------------
// 7. Multi-stability

Verdict multistability() {
  const SmallInstance multi = load_instance(source_path("scenarios/instances/multistable_t2.json"));
  const PropertyReport m = check_properties(multi);
  bool all_nash = true;
  for (const auto& fp : m.fixed_points)
    all_nash = all_nash && std::find(m.pure_nash.begin(), m.pure_nash.end(), fp) != m.pure_nash.end();
  const std::vector<Profile> nash = enumerate_pure_nash(multi);

  const SmallInstance dom = load_instance(source_path("scenarios/instances/dominant_t2.json"));
  const PropertyReport d = check_properties(dom);
  int reached = 0;
  for (const auto& r : d.restarts)
    reached += (d.fixed_points.size() == 1 && r.fixed_point == d.fixed_points[0]) ? 1 : 0;
  return {m.fixed_points.size() >= 2 && all_nash && nash == m.pure_nash && d.fixed_points.size() == 1 &&
              d.restarts.size() == 50 && reached == 50,
          fmt("multistable: %zu fixed points, all pure Nash: %s; dominant: %zu fixed point, %d/%zu restarts reach it",
              m.fixed_points.size(), all_nash ? "yes" : "no", d.fixed_points.size(), reached,
              d.restarts.size())};
}

// ---------------------------------------------------------------------------
// 8. Verifier correctness

std::string disagreement(const SmallInstance& inst) {
  const PropertyReport got = check_properties(inst);
  const reference::Result ref = reference::analyze(inst);
  if (got.ir_buyer != ref.ir_buyer) return "ir_buyer";
  if (got.ir_seller != ref.ir_seller) return "ir_seller";
  if (got.sbb != ref.sbb) return "sbb";
  if (got.pareto != ref.pareto) return "pareto";
  if (got.dsic_gap.cents() != ref.dsic_gap) return "dsic_gap";
  if (got.pure_nash != ref.pure_nash) return "pure_nash";
  if (got.fixed_points != ref.fixed_points) return "fixed_points";
  if (got.realized_welfare.cents() != ref.realized_welfare || got.max_welfare.cents() != ref.max_welfare)
    return "welfare";
  if (got.truthful_allocation.driver != ref.truthful_winner ||
      got.truthful_allocation.price.cents() != ref.truthful_price)
    return "truthful allocation";
  if (got.profiles_enumerated != ref.profiles) return "profile count";
  if (got.restarts.size() != ref.restart_ends.size()) return "restart count";
  for (std::size_t i = 0; i < got.restarts.size(); ++i)
    if (got.restarts[i].fixed_point != ref.restart_ends[i]) return "restart end";
  if (got.ir_buyer_witness.has_value() == got.ir_buyer || got.ir_seller_witness.has_value() == got.ir_seller ||
      got.sbb_witness.has_value() == got.sbb ||
      got.dsic_witness.has_value() != (got.dsic_gap > Money::zero()) ||
      got.pareto_dominating.has_value() == got.pareto)
    return "witness presence";
  if (parse_report(report_json(inst, got)) != got) return "report round trip";
  return {};
}

Verdict verifier() {
  const auto keys = family::sweep(10);
  std::int64_t bad = 0, dsic_positive = 0, multi = 0;
  std::string first;
  for (const auto& k : keys) {
    const SmallInstance inst = family::make(k);
    const std::string why = disagreement(inst);
    if (!why.empty() && bad++ == 0)
      first = fmt("%s n=%d l=%d nb=%d v=%d: ", std::string(to_string(k.type)).c_str(), k.drivers, k.levels,
                  k.allow_no_bid ? 1 : 0, k.variant) +
              why;
    const reference::Result ref = reference::analyze(inst);
    dsic_positive += ref.dsic_gap > 0 ? 1 : 0;
    multi += ref.fixed_points.size() > 1 ? 1 : 0;
  }
  return {bad == 0, fmt("%zu instances, %lld disagreements, %lld with positive dsic_gap, %lld multi-stable",
                        keys.size(), (long long)bad, (long long)dsic_positive, (long long)multi) +
                        (first.empty() ? "" : ", first: " + first)};
}

// ---------------------------------------------------------------------------
// 9. Privacy

Verdict privacy() {
  const RunResult& big = corpus().large;
  const auto clean = audit_privacy(big.log);
  std::int64_t per_type_violations = 0;
  for (const auto& runs : corpus().per_type)
    for (const auto& r : runs) per_type_violations += static_cast<std::int64_t>(audit_privacy(r.log).size());

  const auto& ev = big.log.events();
  int fixtures_ok = 0;
  std::vector<std::string> failed;

  // Relay broadcast to every driver.
  const auto relay = std::find_if(ev.begin(), ev.end(), [](const Event& e) { return e.kind == "relay"; });
  if (relay != ev.end()) {
    std::set<std::string> selected;
    for (const auto& a : big.auctions)
      if (a.ride == relay->ride)
        for (DriverId d : a.selected) selected.insert(driver_tag(d));
    Event leak = *relay;
    leak.visibility = {platform_tag()};
    std::vector<std::string> expected;
    for (int d = 0; d < large_mixed_scenario().fleet.drivers; ++d) {
      leak.visibility.push_back(driver_tag(DriverId(d)));
      if (!selected.count(driver_tag(DriverId(d)))) expected.push_back(driver_tag(DriverId(d)));
    }
    std::sort(leak.visibility.begin(), leak.visibility.end());
    std::sort(expected.begin(), expected.end());
    const auto idx = static_cast<std::size_t>(relay - ev.begin()) + 1;
    const auto v = audit_privacy(synth::with_injected(big.log, idx, leak));
    if (v.size() == 1 && v[0].kind == ViolationKind::Disclosure && v[0].event_index == idx &&
        v[0].recipients == expected)
      ++fixtures_ok;
    else
      failed.push_back("relay broadcast");
  }

  // Introduction ahead of payment.
  const auto intro = std::find_if(ev.begin(), ev.end(), [](const Event& e) { return e.kind == "introduction"; });
  if (intro != ev.end()) {
    const auto pay = std::find_if(ev.begin(), ev.end(),
                                  [&](const Event& e) { return e.kind == "payment" && e.ride == intro->ride; });
    const auto idx = static_cast<std::size_t>(pay - ev.begin());
    const auto v = audit_privacy(synth::with_injected(big.log, idx, *intro));
    if (v.size() == 1 && v[0].kind == ViolationKind::Ordering && v[0].event_index == idx)
      ++fixtures_ok;
    else
      failed.push_back("early introduction");
  }

  // Introduction naming a losing driver after payment.
  std::optional<std::size_t> pay_idx;
  std::optional<DriverId> loser;
  for (const auto& a : big.auctions) {
    if (!a.primary || a.selected.size() < 2) continue;
    for (DriverId d : a.selected)
      if (d != *a.primary && (!a.secondary || d != *a.secondary)) loser = d;
    if (!loser) continue;
    for (std::size_t i = 0; i < ev.size(); ++i)
      if (ev[i].kind == "payment" && ev[i].ride == a.ride) pay_idx = i;
    if (pay_idx) break;
    loser.reset();
  }
  if (pay_idx && loser) {
    Event wrong = ev[*pay_idx];
    wrong.kind = "introduction";
    const auto cust = wrong.get_int("customer").value_or(-1);
    wrong.payload = {{"customer", std::to_string(cust)}, {"driver", std::to_string(loser->value)}};
    wrong.visibility = {customer_tag(CustomerId(cust)), driver_tag(*loser), platform_tag()};
    std::sort(wrong.visibility.begin(), wrong.visibility.end());
    const auto v = audit_privacy(synth::with_injected(big.log, *pay_idx + 1, wrong));
    if (v.size() == 1 && v[0].kind == ViolationKind::Identity && v[0].event_index == *pay_idx + 1)
      ++fixtures_ok;
    else
      failed.push_back("loser introduction");
  }

  std::string detail = fmt("%lld auctions in one run, %zu violations (per-type corpus %lld); %d/3 injected fixtures exact",
                           (long long)big.auctions.size(), clean.size(), (long long)per_type_violations, fixtures_ok);
  for (const auto& f : failed) detail += ", failed: " + f;
  return {big.auctions.size() >= 10'000 && clean.empty() && per_type_violations == 0 && fixtures_ok == 3, detail};
}

// ---------------------------------------------------------------------------
// 10. Deadweight-loss direction

Verdict dwl_direction() {
  const Scenario s = load_scenario(source_path("scenarios/default.json"));
  std::vector<std::uint64_t> seeds(1000);
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = i + 1;
  const CompareResult r = compare_seeds(s, seeds, 1);
  std::int64_t aborted = 0;
  for (const auto& row : r.rows) aborted += row.ok ? 0 : 1;
  bool all = r.summary.has_value() && aborted == 0;
  std::string detail = fmt("%zu seeds, %lld aborted;", r.rows.size(), (long long)aborted);
  if (r.summary)
    for (const SignTest& t : *r.summary) {
      all = all && t.direction_holds;
      detail += fmt(" %s mech %.1f vs base %.1f (lower %lld/%lld, ties %lld, p=%.3g)%s",
                    std::string(to_string(t.type)).c_str(), t.mean_mechanism_dwl, t.mean_baseline_dwl,
                    (long long)t.mechanism_lower, (long long)t.seeds, (long long)t.ties, t.p_value,
                    t.direction_holds ? "" : " FAILS");
    }
  return {all, detail};
}

// ---------------------------------------------------------------------------
// 11. Determinism

Verdict determinism() {
  int compared = 0, differing = 0;
  for (const char* name : {"default.json", "t2_only.json", "cross_contingent.json"})
    for (std::uint64_t seed : {1, 2, 3}) {
      Scenario s = load_scenario(source_path(std::string("scenarios/") + name));
      s.seed = seed;
      for (RunMode mode : {RunMode::Mechanism, RunMode::Baseline}) {
        const RunResult a = run(s, mode);
        Scenario again = load_scenario(source_path(std::string("scenarios/") + name));
        again.seed = seed;
        const RunResult b = run(again, mode);
        const RunReport ra = make_report(a), rb = make_report(b);
        ++compared;
        if (a.log.serialize() != b.log.serialize() || write_report(ra) != write_report(rb) ||
            write_metrics_csv(ra) != write_metrics_csv(rb))
          ++differing;
      }
    }
  const Scenario d = load_scenario(source_path("scenarios/default.json"));
  const CompareResult one = compare_seeds(d, {1, 2, 3, 4}, 1);
  const CompareResult four = compare_seeds(d, {1, 2, 3, 4}, 4);
  const bool compare_same = write_compare_csv(one) == write_compare_csv(four) &&
                            write_compare_summary(one) == write_compare_summary(four);
  return {differing == 0 && compare_same,
          fmt("%d repeated run pairs, %d differing; compare output thread-independent: %s", compared, differing,
              compare_same ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 12. GPS integrity

GpsSample destination(double lat, double lon, double bearing_deg, double km) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double d = km / kEarthRadiusKm, th = bearing_deg * deg, p1 = lat * deg, l1 = lon * deg;
  const double p2 = std::asin(std::sin(p1) * std::cos(d) + std::cos(p1) * std::sin(d) * std::cos(th));
  const double l2 = l1 + std::atan2(std::sin(th) * std::sin(d) * std::cos(p1), std::cos(d) - std::sin(p1) * std::sin(p2));
  return {0, p2 / deg, l2 / deg};
}

Verdict gps() {
  std::int64_t honest = 0, honest_flagged = 0, inflated = 0, inflated_missed = 0;
  for (double lat : {-60.0, -33.9, 0.0, 40.7, 51.5, 64.0})
    for (double lon : {-122.4, 0.0, 139.7})
      for (int bearing = 0; bearing < 360; bearing += 15)
        for (double km : {0.3, 1.0, 4.5, 10.0, 35.0})
          for (int count : {4, 5}) {
            const GpsSample end = destination(lat, lon, bearing, km);
            GpsTrack t;
            t.samples = interpolate_track(lat, lon, end.lat, end.lon, 0, 60 * static_cast<Tick>(km * 2 + 1), count);
            t.precomputed_km = haversine_km(lat, lon, end.lat, end.lon);
            t.precomputed_fare = c(250 + static_cast<std::int64_t>(150 * t.precomputed_km));
            t.reported_km = t.precomputed_km;
            ++honest;
            if (!verify_distance(t).ok) ++honest_flagged;
            for (double f : {0.30, 0.31, 0.5, 1.0, 2.5}) {
              t.reported_km = t.precomputed_km * (1.0 + f);
              ++inflated;
              const DistanceCheck chk = verify_distance(t);
              if (chk.ok || chk.kind != Discrepancy::Inflation) ++inflated_missed;
            }
          }
  return {honest_flagged == 0 && inflated_missed == 0,
          fmt("%lld honest tracks, %lld flagged; %lld inflated by >= 30%%, %lld missed", (long long)honest,
              (long long)honest_flagged, (long long)inflated, (long long)inflated_missed)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Verdict (*fn)();
  };
  const Criterion criteria[] = {
      {1, "payoff-oracle", payoff_oracle},        {2, "ordering-admissibility", ordering},
      {3, "strong-budget-balance", budget_balance}, {4, "individual-rationality", individual_rationality},
      {5, "collusion-detector", collusion},       {6, "sync-logoff-detector", sync_logoff},
      {7, "multi-stability", multistability},     {8, "verifier-agreement", verifier},
      {9, "privacy-audit", privacy},              {10, "dwl-direction", dwl_direction},
      {11, "determinism", determinism},           {12, "gps-integrity", gps},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.id == 1 && secs >= 10.0) {
      o.pass = false;
      o.detail += fmt(" (took %.1f s, limit 10 s)", secs);
    }
    if (c.id == 8 && secs >= 60.0) {
      o.pass = false;
      o.detail += fmt(" (took %.1f s, limit 60 s)", secs);
    }
    std::printf("%s %2d %-24s %6.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
