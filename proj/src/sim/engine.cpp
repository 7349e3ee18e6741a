#include "sim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "agents/agents.hpp"
#include "core/error.hpp"
#include "mechanisms/lockout.hpp"

namespace bidride {

std::string_view to_string(RunMode m) {
  return m == RunMode::Mechanism ? "mechanism" : "baseline";
}

void LedgerTotals::add(const Ledger& l) {
  ++ledgers;
  if (!l.balanced()) ++unbalanced;
  for (const LedgerEntry& e : l.entries()) {
    by_reason[std::string(to_string(e.reason))] += e.amount;
    if (e.direction == Direction::In) {
      inflow_by_party[std::string(to_string(e.party))] += e.amount;
      inflow += e.amount;
    } else {
      outflow_by_party[std::string(to_string(e.party))] += e.amount;
      outflow += e.amount;
    }
  }
}

namespace {

enum class Ev : std::uint8_t { Arrival, Response, CloseRound, Pickup, Complete, Logoff, Logon };

struct Pending {
  Tick tick = 0;
  std::uint64_t seq = 0;
  Ev kind = Ev::Arrival;
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::int64_t c = 0;

  bool operator>(const Pending& o) const {
    return tick != o.tick ? tick > o.tick : seq > o.seq;
  }
};

struct DriverState {
  DriverProfile profile;
  Tick busy_until = 0;
  std::set<std::size_t> open;  // slots the driver is selected in and still open
};

struct Slot {
  std::size_t request = 0;
  int sibling = 0;
  RideId ride;
  GeoPoint origin;
  std::optional<Auction> auction;
  std::size_t record = 0;
};

struct RideTask {
  std::size_t request = 0;
  std::size_t driver = 0;
  std::optional<std::size_t> slot;
  GeoPoint origin;
  Tick promised = 0;
  Tick driver_arrival = 0;
  Tick customer_arrival = 0;
};

std::string join_ids(const std::vector<DriverSnapshot>& v) {
  std::string out;
  for (const auto& d : v) {
    if (!out.empty()) out += '|';
    out += std::to_string(d.id.value);
  }
  return out;
}

std::string state_label(MechanismType type, BidAction a) {
  auto n = preference_state(type, a);
  return n ? "S_d" + std::to_string(*n) : std::string("none");
}

bool terminal(Phase p) {
  return p == Phase::Assigned || p == Phase::Settled || p == Phase::Failed;
}

class Engine {
 public:
  Engine(const Scenario& s, const World& w, RunMode mode) : s_(s), w_(w), mode_(mode) {
    res_.seed = s.seed;
    res_.mode = mode;
    res_.scenario_digest = scenario_digest(s);
    for (const GeneratedDriver& g : w.drivers) drivers_.push_back({g.profile, 0, {}});
  }

  RunResult run() {
    for (std::size_t i = 0; i < w_.requests.size(); ++i)
      schedule(w_.requests[i].tick, Ev::Arrival, static_cast<std::int64_t>(i));
    for (std::size_t d = 0; d < w_.drivers.size(); ++d)
      for (std::size_t k = 0; k < w_.drivers[d].logoffs.size(); ++k)
        schedule(w_.drivers[d].logoffs[k].first, Ev::Logoff, static_cast<std::int64_t>(d),
                 static_cast<std::int64_t>(k));
    try {
      while (!queue_.empty()) {
        const Pending p = queue_.top();
        queue_.pop();
        if (p.tick > now_) flush_beliefs();
        now_ = p.tick;
        dispatch(p);
      }
      flush_beliefs();
      finish();
    } catch (const Error& e) {
      res_.failure = RunFailure{s_.seed, now_, std::string(to_string(e.kind())) + ": " + e.what()};
    }
    return std::move(res_);
  }

 private:
  // ---- plumbing ---------------------------------------------------------

  void schedule(Tick t, Ev k, std::int64_t a = 0, std::int64_t b = 0, std::int64_t c = 0) {
    queue_.push({t, seq_++, k, a, b, c});
  }

  void emit(std::string kind, RideId ride, Payload p, std::vector<std::string> vis) {
    res_.log.append(now_, std::move(kind), ride, p.take(), std::move(vis));
  }

  void require(bool ok, const std::string& what) {
    if (!ok && s_.check_invariants) fail(ErrorKind::Invariant, what);
  }

  TypeMetrics& metrics(MechanismType t) { return res_.metrics[static_cast<std::size_t>(index_of(t))]; }

  const GeneratedRequest& req(std::size_t i) const { return w_.requests[i]; }

  static std::string P() { return platform_tag(); }
  static std::string C(CustomerId c) { return customer_tag(c); }
  static std::string D(DriverId d) { return driver_tag(d); }
  static DriverId did(std::size_t i) { return DriverId(static_cast<std::int64_t>(i)); }

  void dispatch(const Pending& p) {
    switch (p.kind) {
      case Ev::Arrival: arrival(static_cast<std::size_t>(p.a)); break;
      case Ev::Response:
        response(static_cast<std::size_t>(p.a), static_cast<std::size_t>(p.b), p.c);
        break;
      case Ev::CloseRound: close_round(static_cast<std::size_t>(p.a), static_cast<int>(p.b)); break;
      case Ev::Pickup: pickup(static_cast<std::size_t>(p.a)); break;
      case Ev::Complete: complete(static_cast<std::size_t>(p.a)); break;
      case Ev::Logoff: logoff(static_cast<std::size_t>(p.a), static_cast<std::size_t>(p.b)); break;
      case Ev::Logon: logon(static_cast<std::size_t>(p.a)); break;
    }
  }

  std::vector<DriverSnapshot> idle_fleet(GeoPoint origin) const {
    std::vector<DriverSnapshot> out;
    for (std::size_t i = 0; i < drivers_.size(); ++i) {
      const DriverState& d = drivers_[i];
      if (d.busy_until > now_) continue;
      if (locks_.is_blocked(did(i), now_)) continue;
      out.push_back({did(i), travel_time(d.profile.location, origin, d.profile.speed_kmh),
                     d.profile.quality});
    }
    return out;
  }

  Money fee_at(Money price, const PricingParams& params) const {
    const Money taxes = apply_fraction(price, s_.economics.taxes_rate);
    const Money third = min(s_.economics.third_party_fee, price - taxes);
    return compute_driver_fee(price, taxes, third, params);
  }

  std::vector<ConcurrentOpportunity> concurrent_for(std::size_t driver, std::size_t except) const {
    std::vector<ConcurrentOpportunity> out;
    for (std::size_t slot : drivers_[driver].open) {
      if (slot == except) continue;
      const Auction& a = *slots_[slot].auction;
      if (terminal(a.state().phase)) continue;
      out.push_back({a.state().customer_bid.cap});
    }
    return out;
  }

  // Best net profit a driver could see in its other open auctions.
  Money alternative_profit(std::size_t driver, std::size_t except) const {
    Money best = Money::zero();
    const DriverState& d = drivers_[driver];
    for (std::size_t slot : d.open) {
      if (slot == except) continue;
      const Auction& a = *slots_[slot].auction;
      if (terminal(a.state().phase)) continue;
      const GeneratedRequest& r = req(slots_[slot].request);
      const DriverEconomics e = ride_economics(
          d.profile, r.trip_km + distance_km(d.profile.location, slots_[slot].origin),
          Probability::zero());
      const Money net = fee_at(a.state().customer_bid.cap, a.params()) - e.d_v - e.d_f;
      best = max(best, net);
    }
    return best;
  }

  void flush_beliefs() {
    for (auto& [driver, obs] : pending_beliefs_) {
      DriverProfile& p = drivers_[driver].profile;
      p.beliefs = update_beliefs(p.beliefs, obs, s_.learning_rate);
    }
    pending_beliefs_.clear();
  }

  // ---- arrivals ---------------------------------------------------------

  void arrival(std::size_t i) {
    const GeneratedRequest& r = req(i);
    TypeMetrics& m = metrics(r.type);
    ++m.requests;
    TradeRecord t;
    t.valuation = r.request.valuation;
    t.reference_cost = r.reference_cost;
    res_.trades.push_back(t);
    res_.trade_types.push_back(r.type);

    const int opened = mode_ == RunMode::Mechanism ? r.siblings : 1;
    std::vector<RideId> rides;
    for (int k = 0; k < opened; ++k) {
      rides.push_back(RideId(next_ride_++));
      emit("request", rides.back(),
           std::move(Payload()
                         .add("customer", r.request.id.value)
                         .add("neighborhood", r.request.neighborhood)
                         .add("type", std::string(to_string(r.type)))
                         .add("distance_m", r.route.distance_m)
                         .add("sibling", k)),
           {P(), C(r.request.id)});
    }
    if (mode_ == RunMode::Mechanism)
      mechanism_arrival(i, rides);
    else
      baseline_arrival(i, rides.front());
  }

  void mechanism_arrival(std::size_t i, const std::vector<RideId>& rides) {
    const GeneratedRequest& r = req(i);
    const PricingParams& params = s_.pricing_for(r.type);
    const PriceQuote quote = quote_prices(params, s_.economics, r.route, s_.brand_subsidy);
    const auto proposal = propose_customer_bid(r.request, quote, r.type, params);
    TypeMetrics& m = metrics(r.type);
    if (!proposal) {
      ++m.declined;
      emit("customer_declined", rides.front(),
           std::move(Payload().add("customer", r.request.id.value).add("reason", std::string("price"))),
           {P(), C(r.request.id)});
      return;
    }
    for (std::size_t k = 0; k < rides.size(); ++k) {
      const std::size_t slot_index = slots_.size();
      Slot slot;
      slot.request = i;
      slot.sibling = static_cast<int>(k);
      slot.ride = rides[k];
      slot.origin = r.sibling_origins[k];
      slot.auction = Auction::open(rides[k], r.request.id, proposal->bid, quote, params, now_);
      slot.record = res_.auctions.size();
      slots_.push_back(std::move(slot));
      request_slots_[i].push_back(slot_index);
      ++m.auctions;

      Auction& a = *slots_[slot_index].auction;
      AuctionRecord rec;
      rec.ride = rides[k];
      rec.customer = r.request.id;
      rec.type = r.type;
      rec.quote = quote;
      rec.initial_bid = a.state().customer_bid;
      res_.auctions.push_back(rec);

      emit("auction_open", rides[k],
           std::move(Payload()
                         .add("customer", r.request.id.value)
                         .add("type", std::string(to_string(r.type)))
                         .add("standard", quote.standard.cents())
                         .add("base", quote.base.cents())
                         .add("low", a.state().customer_bid.low.cents())
                         .add("cap", a.state().customer_bid.cap.cents())),
           {P(), C(r.request.id)});

      const auto fleet = idle_fleet(slots_[slot_index].origin);
      a.select_drivers(fleet, locks_, now_);
      if (a.state().phase == Phase::Failed) {
        ++m.failed_no_supply;
        emit("auction_failed", rides[k],
             std::move(Payload()
                           .add("customer", r.request.id.value)
                           .add("reason", std::string(to_string(a.state().failure)))),
             {P(), C(r.request.id)});
        sync_record(slot_index);
        continue;
      }
      if (a.state().thin_market) ++m.thin_markets;
      emit("selection", rides[k],
           std::move(Payload()
                         .add("drivers", join_ids(a.state().selected))
                         .add("thin", a.state().thin_market ? 1 : 0)),
           {P()});
      if (proposal->revision) {
        a.revise_customer_bid(*proposal->revision, now_);
        ++m.customer_revisions;
        emit("customer_revision", rides[k],
             std::move(Payload()
                           .add("customer", r.request.id.value)
                           .add("low", a.state().customer_bid.low.cents())
                           .add("cap", a.state().customer_bid.cap.cents())
                           .add("revision", a.state().customer_bid.revision_count)),
             {P(), C(r.request.id)});
      }
      for (const DriverSnapshot& d : a.state().selected) {
        const auto di = static_cast<std::size_t>(d.id.value);
        drivers_[di].open.insert(slot_index);
        emit("relay", rides[k],
             std::move(Payload()
                           .add("driver", d.id.value)
                           .add("type", std::string(to_string(r.type)))
                           .add("standard", quote.standard.cents())
                           .add("base", quote.base.cents())
                           .add("low", a.state().customer_bid.low.cents())
                           .add("cap", a.state().customer_bid.cap.cents())
                           .add("distance_m", r.route.distance_m)
                           .add("eta", d.eta)),
             {P(), D(d.id)});
        schedule_response(slot_index, di, a.state().round);
      }
      schedule(a.state().bid_deadline, Ev::CloseRound, static_cast<std::int64_t>(slot_index),
               a.state().round);
      sync_record(slot_index);
    }
  }

  void schedule_response(std::size_t slot, std::size_t driver, int round) {
    const Slot& sl = slots_[slot];
    const double u = derived_uniform(req(sl.request).noise, driver,
                                     static_cast<std::uint64_t>(round) * 8 + 1,
                                     static_cast<std::uint64_t>(sl.sibling));
    const Seconds delay =
        1 + static_cast<Seconds>(u * static_cast<double>(s_.ride.response_delay_max));
    schedule(now_ + delay, Ev::Response, static_cast<std::int64_t>(slot),
             static_cast<std::int64_t>(driver), round);
  }

  // ---- bidding ----------------------------------------------------------

  void response(std::size_t slot_index, std::size_t driver, std::int64_t round) {
    Slot& sl = slots_[slot_index];
    Auction& a = *sl.auction;
    const GeneratedRequest& r = req(sl.request);
    TypeMetrics& m = metrics(r.type);
    const DriverId id = did(driver);
    if (a.state().failure == FailureReason::Cancelled) return;
    if (terminal(a.state().phase)) {
      ++m.late_responses;
      emit("late_response", sl.ride, std::move(Payload().add("driver", id.value)),
           {P(), D(id)});
      return;
    }
    DriverState& ds = drivers_[driver];
    const bool locked = locks_.is_blocked(id, now_) || ds.busy_until > now_;
    AuctionView view;
    view.type = r.type;
    view.quote = a.state().quote;
    view.customer_bid = a.state().customer_bid;
    view.admissible = a.admissible();
    view.ride_km = r.trip_km;
    view.pickup_km = distance_km(ds.profile.location, sl.origin);
    const auto concurrent = concurrent_for(driver, slot_index);
    const double u = derived_uniform(r.noise, driver, static_cast<std::uint64_t>(round) * 8 + 2,
                                     static_cast<std::uint64_t>(sl.sibling));
    const auto pref = choose_driver_action(ds.profile, view, concurrent, u, locked, s_.combinator);
    if (!pref) {
      a.exempt(id);
      ++m.rejected_bids;
      emit("bid_rejected", sl.ride,
           std::move(Payload().add("driver", id.value).add("reason", std::string("lockout"))),
           {P(), D(id)});
      return;
    }
    const Interval admissible = a.admissible();
    std::optional<Money> price;
    try {
      price = a.submit_driver_bid(id, *pref, now_, locks_);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::LateBid) {
        ++m.late_responses;
        emit("late_response", sl.ride, std::move(Payload().add("driver", id.value)),
             {P(), D(id)});
        return;
      }
      if (e.kind() != ErrorKind::RejectedBid) throw;
      ++m.rejected_bids;
      emit("bid_rejected", sl.ride,
           std::move(Payload().add("driver", id.value).add("reason", std::string("rejected"))),
           {P(), D(id)});
      return;
    }
    const std::string label = state_label(r.type, pref->action);
    if (price) {
      ++m.bids;
      res_.auctions[sl.record].bids.push_back(
          {id, *price, a.state().round, admissible, now_});
      emit("driver_bid", sl.ride,
           std::move(Payload()
                         .add("driver", id.value)
                         .add("price", price->cents())
                         .add("state", label)
                         .add("action", std::string(to_string(pref->action)))
                         .add("round", a.state().round)),
           {P(), D(id)});
    } else {
      ++m.no_bids;
      emit("no_bid", sl.ride, std::move(Payload().add("driver", id.value).add("state", label)),
           {P(), D(id)});
    }
    sync_record(slot_index);
  }

  void close_round(std::size_t slot_index, int round) {
    Slot& sl = slots_[slot_index];
    Auction& a = *sl.auction;
    if (terminal(a.state().phase) || a.state().round != round) return;
    const GeneratedRequest& r = req(sl.request);
    TypeMetrics& m = metrics(r.type);

    for (const auto& [driver, bid] : a.state().driver_bids) {
      if (bid.withdrawn || !locks_.is_off_duty(driver)) continue;
      const DriverId d = driver;
      a.withdraw_bid(d);
      emit("bid_withdrawn", sl.ride,
           std::move(Payload().add("driver", d.value).add("reason", std::string("off_duty"))),
           {P(), D(d)});
    }

    const auto ranked = a.ranked_bids();
    bool acceptable = false;
    if (!ranked.empty()) {
      const ClearingResult c = clearing_price(r.type, a.state().customer_bid.cap,
                                              ranked.front().price, a.state().quote.base,
                                              a.state().quote.standard);
      acceptable = c.feasible;
    }
    if (!acceptable && now_ <= a.state().revision_deadline) {
      const auto next = next_customer_revision(r.request, a.state());
      const double u = derived_uniform(r.noise, 0x7e7, static_cast<std::uint64_t>(round),
                                       static_cast<std::uint64_t>(sl.sibling));
      if (next && u < r.request.patience.value()) {
        a.revise_customer_bid(*next, now_);
        ++m.customer_revisions;
        emit("customer_revision", sl.ride,
             std::move(Payload()
                           .add("customer", r.request.id.value)
                           .add("low", a.state().customer_bid.low.cents())
                           .add("cap", a.state().customer_bid.cap.cents())
                           .add("revision", a.state().customer_bid.revision_count)),
             {P(), C(r.request.id)});
        const bool rebid = r.type == MechanismType::T1 || r.type == MechanismType::T3;
        for (const DriverSnapshot& d : a.state().selected) {
          emit("relay_revision", sl.ride,
               std::move(Payload()
                             .add("driver", d.id.value)
                             .add("low", a.state().customer_bid.low.cents())
                             .add("cap", a.state().customer_bid.cap.cents())
                             .add("revision", a.state().customer_bid.revision_count)),
               {P(), D(d.id)});
          if (rebid) schedule_response(slot_index, static_cast<std::size_t>(d.id.value),
                                       a.state().round);
        }
        schedule(a.state().bid_deadline, Ev::CloseRound, static_cast<std::int64_t>(slot_index),
                 a.state().round);
        sync_record(slot_index);
        return;
      }
    }
    finalize(slot_index);
  }

  void finalize(std::size_t slot_index) {
    Slot& sl = slots_[slot_index];
    Auction& a = *sl.auction;
    const GeneratedRequest& r = req(sl.request);
    TypeMetrics& m = metrics(r.type);

    // The primary's other auctions must be seen before it leaves them.
    std::vector<Money> alternatives;
    a.assign(now_, locks_);
    const AuctionState& st = a.state();

    if (st.phase == Phase::Assigned) {
      assigned(slot_index);
    } else {
      switch (st.failure) {
        case FailureReason::NoBids: ++m.failed_no_bids; break;
        case FailureReason::NoFeasibleBid: ++m.failed_no_feasible; break;
        case FailureReason::NoSupply: ++m.failed_no_supply; break;
        default: break;
      }
      emit("auction_failed", sl.ride,
           std::move(Payload()
                         .add("customer", r.request.id.value)
                         .add("reason", std::string(to_string(st.failure)))),
           {P(), C(r.request.id)});
    }

    for (DriverId d : a.no_bid_fee_liable()) {
      const Money fee = a.params().no_bid_fee;
      res_.ledger.add(settle_no_bid_fee(fee));
      ++m.no_bid_fees;
      m.no_bid_fee_total += fee;
      emit("no_bid_fee", sl.ride, std::move(Payload().add("driver", d.value).add("amount", fee.cents())),
           {P(), D(d)});
    }

    if (s_.learning_rate.ppb() > 0) {
      for (const auto& [d, bid] : st.driver_bids) {
        const auto di = static_cast<std::size_t>(d.value);
        pending_beliefs_[di].push_back(
            {alternative_profit(di, slot_index), st.primary && *st.primary == d});
      }
    }
    release(slot_index);
    sync_record(slot_index);
  }

  void release(std::size_t slot_index) {
    for (const DriverSnapshot& d : slots_[slot_index].auction->state().selected)
      drivers_[static_cast<std::size_t>(d.id.value)].open.erase(slot_index);
  }

  void assigned(std::size_t slot_index) {
    Slot& sl = slots_[slot_index];
    Auction& a = *sl.auction;
    const AuctionState& st = a.state();
    const GeneratedRequest& r = req(sl.request);
    TypeMetrics& m = metrics(r.type);
    const PricingParams& params = a.params();
    const DriverId primary = *st.primary;
    const auto pi = static_cast<std::size_t>(primary.value);
    DriverState& ds = drivers_[pi];

    require(ds.busy_until <= now_, "driver " + std::to_string(primary.value) +
                                       " assigned while still on a ride");
    check_lockouts(primary);

    const auto concurrent = concurrent_for(pi, slot_index);
    const Probability beta_ld = opportunity_likelihood(st.customer_bid.cap, concurrent);
    const DriverEconomics de = ride_economics(
        ds.profile, r.trip_km + distance_km(ds.profile.location, sl.origin), beta_ld);
    const Money winning = *st.winning_bid;
    const PayoffResult pay =
        evaluate_ride(r.type, st.customer_bid.cap, winning, st.quote.base, st.quote.standard,
                      params, s_.economics, de, s_.combinator);

    const Money ceiling = r.type == MechanismType::T2   ? st.quote.standard
                          : r.type == MechanismType::T4 ? flex_band(st.quote.standard, params.flex_band).hi
                                                        : st.customer_bid.cap;
    require(pay.feasible_trade, "assigned ride without a feasible trade");
    require(st.quote.base <= winning, "winning bid below base price");
    require(winning <= ceiling, "winning bid above the type ceiling");
    require(pay.clearing_price <= st.customer_bid.cap, "customer charged above own cap");
    require(pay.clearing_price >= winning, "driver paid below own bid");
    require(pay.platform_payoff >= Money::zero() && pay.driver_payoff >= Money::zero(),
            "negative expected payoff");
    require(pay.driver_fee <= pay.clearing_price, "driver fee exceeds price");

    std::vector<Money> alts;
    for (std::size_t other : ds.open) {
      if (other == slot_index) continue;
      const Auction& oa = *slots_[other].auction;
      if (terminal(oa.state().phase)) continue;
      const GeneratedRequest& orq = req(slots_[other].request);
      const DriverEconomics oe = ride_economics(
          ds.profile, orq.trip_km + distance_km(ds.profile.location, slots_[other].origin),
          Probability::zero());
      alts.push_back(driver_payoff(fee_at(oa.state().customer_bid.cap, oa.params()), oe,
                                   s_.combinator));
    }
    m.regret += driver_regret(pay.driver_payoff, alts);

    emit("assignment", sl.ride,
         std::move(Payload()
                       .add("driver", primary.value)
                       .add("role", std::string("primary"))
                       .add("bid", winning.cents())
                       .add("price", pay.clearing_price.cents())),
         {P(), D(primary)});
    if (st.secondary)
      emit("assignment", sl.ride,
           std::move(Payload()
                         .add("driver", st.secondary->value)
                         .add("role", std::string("secondary"))),
           {P(), D(*st.secondary)});
    for (const auto& [d, bid] : st.driver_bids)
      emit("bid_outcome", sl.ride,
           std::move(Payload().add("driver", d.value).add("won", d == primary ? 1 : 0)),
           {P(), D(d)});

    for (std::size_t other : request_slots_[sl.request]) {
      if (other == slot_index) continue;
      Auction& oa = *slots_[other].auction;
      if (terminal(oa.state().phase)) continue;
      oa.fail_with(FailureReason::Cancelled);
      for (const DriverSnapshot& d : oa.state().selected) oa.exempt(d.id);
      ++m.cancelled;
      emit("sibling_cancelled", slots_[other].ride,
           std::move(Payload().add("customer", r.request.id.value)),
           {P(), C(r.request.id)});
      release(other);
      sync_record(other);
    }

    res_.auctions[sl.record].clearing_price = pay.clearing_price;
    res_.auctions[sl.record].branch = pay.branch;
    pay_and_start(sl.request, sl.ride, pi, sl.origin, st.customer_bid.cap, winning, pay, de,
                  slot_index);
  }

  void check_lockouts(DriverId d) {
    const auto iv = locks_.intervals(d);
    for (std::size_t i = 0; i < iv.size(); ++i)
      for (std::size_t j = i + 1; j < iv.size(); ++j)
        require(!iv[i].overlaps(iv[j]),
                "driver " + std::to_string(d.value) + " holds overlapping lockouts");
  }

  // ---- fixed-price baseline --------------------------------------------

  void baseline_arrival(std::size_t i, RideId ride) {
    const GeneratedRequest& r = req(i);
    const PricingParams& params = s_.pricing_for(r.type);
    const PriceQuote quote = quote_prices(params, s_.economics, r.route, s_.brand_subsidy);
    TypeMetrics& m = metrics(r.type);
    const Money price = quote.standard;
    const bool accepted = r.request.valuation >= price && price > Money::zero();
    emit("fixed_price_offer", ride,
         std::move(Payload()
                       .add("customer", r.request.id.value)
                       .add("price", price.cents())
                       .add("accepted", accepted ? 1 : 0)),
         {P(), C(r.request.id)});
    if (!accepted) {
      ++m.declined;
      return;
    }
    auto fleet = idle_fleet(r.request.origin);
    std::sort(fleet.begin(), fleet.end(), [](const DriverSnapshot& a, const DriverSnapshot& b) {
      return a.eta != b.eta ? a.eta < b.eta : a.id < b.id;
    });
    if (fleet.size() > static_cast<std::size_t>(params.max_selected))
      fleet.resize(static_cast<std::size_t>(params.max_selected));
    for (const DriverSnapshot& snap : fleet) {
      const auto di = static_cast<std::size_t>(snap.id.value);
      const DriverState& ds = drivers_[di];
      const DriverEconomics de = ride_economics(
          ds.profile, r.trip_km + distance_km(ds.profile.location, r.request.origin),
          Probability::zero());
      if (break_even(de, s_.combinator) > price) continue;
      if (!locks_.reserve(snap.id, ride, now_, params.lockout_before, params.lockout_after))
        continue;
      check_lockouts(snap.id);
      PayoffResult pay;
      pay.clearing_price = price;
      pay.taxes = apply_fraction(price, s_.economics.taxes_rate);
      pay.third_party = min(s_.economics.third_party_fee, price - pay.taxes);
      pay.driver_fee = compute_driver_fee(price, pay.taxes, pay.third_party, params);
      pay.platform_payoff = platform_payoff(price, pay.driver_fee, s_.economics, s_.combinator);
      pay.driver_payoff = driver_payoff(pay.driver_fee, de, s_.combinator);
      pay.feasible_trade = true;
      emit("assignment", ride,
           std::move(Payload()
                         .add("driver", snap.id.value)
                         .add("role", std::string("primary"))
                         .add("price", price.cents())),
           {P(), D(snap.id)});
      pay_and_start(i, ride, di, r.request.origin, price, std::nullopt, pay, de, std::nullopt);
      return;
    }
    ++m.failed_no_bids;
    emit("auction_failed", ride,
         std::move(Payload()
                       .add("customer", r.request.id.value)
                       .add("reason", std::string("no_willing_driver"))),
         {P(), C(r.request.id)});
  }

  // ---- rides ------------------------------------------------------------

  void pay_and_start(std::size_t request, RideId ride, std::size_t driver, GeoPoint origin,
                     Money cap, std::optional<Money> winning, const PayoffResult& pay,
                     const DriverEconomics& de, std::optional<std::size_t> slot) {
    const GeneratedRequest& r = req(request);
    const DriverId id = did(driver);
    const CustomerId cust = r.request.id;
    emit("price_notice", ride,
         std::move(Payload()
                       .add("customer", cust.value)
                       .add("price", pay.clearing_price.cents())
                       .add("branch", std::string(to_string(pay.branch)))),
         {P(), C(cust)});
    emit("payment", ride,
         std::move(Payload().add("customer", cust.value).add("amount", pay.clearing_price.cents())),
         {P(), C(cust)});
    emit("introduction", ride,
         std::move(Payload().add("customer", cust.value).add("driver", id.value)),
         {P(), C(cust), D(id)});

    DriverState& ds = drivers_[driver];
    const Seconds eta = travel_time(ds.profile.location, origin, ds.profile.speed_kmh);
    RideTask task;
    task.request = request;
    task.driver = driver;
    task.slot = slot;
    task.origin = origin;
    task.promised = now_ + eta;
    task.driver_arrival = task.promised + r.driver_late;
    task.customer_arrival = task.promised + r.customer_late;
    const Tick pickup_at = std::max(task.driver_arrival, task.customer_arrival);
    const Seconds duration = std::max<Seconds>(
        4, travel_time(origin, r.request.destination, ds.profile.speed_kmh));

    RideOutcome o;
    o.ride = ride;
    o.customer = cust;
    o.driver = id;
    o.type = r.type;
    o.cap = cap;
    o.winning_bid = winning;
    o.price = pay.clearing_price;
    o.payoff = pay;
    o.driver_economics = de;
    o.assigned_at = now_;
    o.pickup_at = pickup_at;
    o.completed_at = pickup_at + duration;
    ds.busy_until = o.completed_at;

    const std::size_t idx = res_.rides.size();
    res_.rides.push_back(std::move(o));
    tasks_.push_back(task);
    schedule(pickup_at, Ev::Pickup, static_cast<std::int64_t>(idx));
    schedule(pickup_at + duration, Ev::Complete, static_cast<std::int64_t>(idx));
  }

  void pickup(std::size_t idx) {
    const RideOutcome& o = res_.rides[idx];
    const RideTask& t = tasks_[idx];
    emit("pickup", o.ride,
         std::move(Payload()
                       .add("customer", o.customer.value)
                       .add("driver", o.driver.value)
                       .add("driver_late", std::max<Seconds>(0, t.driver_arrival - t.promised))
                       .add("customer_late", std::max<Seconds>(0, t.customer_arrival - t.promised))),
         {P(), C(o.customer), D(o.driver)});
  }

  void complete(std::size_t idx) {
    RideOutcome& o = res_.rides[idx];
    const RideTask& t = tasks_[idx];
    const GeneratedRequest& r = req(t.request);
    DriverState& ds = drivers_[t.driver];
    const PricingParams& params = s_.pricing_for(r.type);
    TypeMetrics& m = metrics(r.type);

    GpsTrack track;
    track.samples = interpolate_track(t.origin.lat, t.origin.lon, r.request.destination.lat,
                                      r.request.destination.lon, o.pickup_at, o.completed_at, 5);
    track.precomputed_km = distance_km(t.origin, r.request.destination);
    track.precomputed_fare = o.price;
    track.reported_km = track.precomputed_km * (1.0 + r.gps_inflation);
    o.gps = verify_distance(track, s_.integrity.distance_tolerance, params.meter.per_km);
    const Money final_price = min(o.price, o.gps.settlement_fare);

    RideCharges charges;
    charges.price = final_price;
    charges.taxes = apply_fraction(final_price, s_.economics.taxes_rate);
    charges.third_party = min(s_.economics.third_party_fee, final_price - charges.taxes);
    charges.driver_fee =
        compute_driver_fee(final_price, charges.taxes, charges.third_party, params);
    GuaranteeTerms terms = s_.guarantees;
    terms.discount_rate = params.guarantee_discount;
    RideTimes times;
    times.promised_pickup = t.promised;
    times.driver_arrival = t.driver_arrival;
    times.customer_arrival = t.customer_arrival;
    times.clock_start = o.assigned_at;
    times.completion = o.completed_at;
    o.guarantees = apply_guarantees(charges, terms, times);
    o.ledger = settle(o.guarantees.terms);
    require(o.ledger.balanced(), "ride " + std::to_string(o.ride.value) + " ledger unbalanced");
    res_.ledger.add(o.ledger);

    const Seconds occupancy = o.completed_at - o.pickup_at;
    RouteEstimate reported_route;
    reported_route.distance_m = std::max<std::int64_t>(1, std::llround(track.reported_km * 1000.0));
    reported_route.duration = occupancy;
    o.revenue = reconcile_revenue(occupancy, params.meter, ds.profile.speed_kmh / 60.0,
                                  meter_fare(params.meter, reported_route),
                                  s_.integrity.revenue_tolerance);

    ++m.trades;
    m.gross_price += final_price;
    m.guarantee_discounts += o.guarantees.customer_discount;
    m.fulfillment_fees += o.guarantees.fulfillment_fee;
    m.incentive_fees += o.guarantees.incentive_fee;
    if (o.guarantees.driver_late) ++m.late_drivers;
    if (o.guarantees.customer_late) ++m.late_customers;
    if (!o.gps.ok) ++m.gps_flags;
    if (!o.revenue.ok()) ++m.revenue_flags;
    m.platform_payoff += o.payoff.platform_payoff;
    m.driver_payoff += o.payoff.driver_payoff;
    m.platform_retention += o.ledger.total(Reason::Retention);

    TradeRecord& tr = res_.trades[t.request];
    tr.executed = true;
    tr.payment = o.guarantees.customer_pays();
    tr.driver_pay = o.guarantees.driver_receives();
    tr.driver_cost = o.driver_economics.d_v + o.driver_economics.d_f;

    emit("ride_complete", o.ride,
         std::move(Payload().add("customer", o.customer.value).add("driver", o.driver.value)),
         {P(), C(o.customer), D(o.driver)});
    emit("gps_check", o.ride,
         std::move(Payload()
                       .add("driver", o.driver.value)
                       .add("sampled_m", std::llround(o.gps.sampled_km * 1000.0))
                       .add("reported_m", std::llround(o.gps.reported_km * 1000.0))
                       .add("ok", o.gps.ok ? 1 : 0)
                       .add("kind", std::string(to_string(o.gps.kind)))),
         {P()});
    emit("revenue_check", o.ride,
         std::move(Payload()
                       .add("driver", o.driver.value)
                       .add("estimated", o.revenue.estimated.cents())
                       .add("reported", o.revenue.reported.cents())
                       .add("status", std::string(to_string(o.revenue.status)))),
         {P()});
    emit("settlement", o.ride,
         std::move(Payload()
                       .add("customer", o.customer.value)
                       .add("driver", o.driver.value)
                       .add("payment", o.guarantees.terms.ride_payment.cents())
                       .add("fulfillment_fee", o.guarantees.terms.fulfillment_fee.cents())
                       .add("driver_fee", o.guarantees.terms.driver_fee.cents())
                       .add("fulfillment_share", o.guarantees.terms.fulfillment_share.cents())
                       .add("incentive_fee", o.guarantees.terms.incentive_fee.cents())
                       .add("taxes", o.guarantees.terms.taxes.cents())
                       .add("third_party", o.guarantees.terms.third_party.cents())
                       .add("retention", o.ledger.total(Reason::Retention).cents())
                       .add("balanced", o.ledger.balanced() ? 1 : 0)),
         {P()});
    emit("receipt", o.ride,
         std::move(Payload()
                       .add("customer", o.customer.value)
                       .add("charged", o.guarantees.customer_pays().cents())
                       .add("refund", (o.price - o.guarantees.terms.ride_payment).cents())),
         {P(), C(o.customer)});
    emit("payout", o.ride,
         std::move(Payload()
                       .add("driver", o.driver.value)
                       .add("amount", o.guarantees.driver_receives().cents())),
         {P(), D(o.driver)});

    ds.profile.location = r.request.destination;
    if (t.slot) {
      Auction& a = *slots_[*t.slot].auction;
      a.mark_settled();
      for (Phase ph : {Phase::Opened, Phase::DriversSelected, Phase::Assigned, Phase::Settled})
        require(std::count(a.state().history.begin(), a.state().history.end(), ph) == 1,
                "ride " + std::to_string(o.ride.value) + " skipped or repeated phase " +
                    std::string(to_string(ph)));
      sync_record(*t.slot);
    }
  }

  // ---- duty -------------------------------------------------------------

  void logoff(std::size_t driver, std::size_t k) {
    const auto [start, len] = w_.drivers[driver].logoffs[k];
    (void)start;
    locks_.set_off_duty(did(driver), now_, s_.fleet.min_return);
    emit("logoff", RideId(), std::move(Payload().add("driver", static_cast<std::int64_t>(driver))),
         {P(), D(did(driver))});
    schedule(now_ + std::max(len, s_.fleet.min_return), Ev::Logon,
             static_cast<std::int64_t>(driver));
  }

  void logon(std::size_t driver) {
    if (locks_.return_to_duty(did(driver), now_))
      emit("logon", RideId(), std::move(Payload().add("driver", static_cast<std::int64_t>(driver))),
           {P(), D(did(driver))});
  }

  // ---- bookkeeping ------------------------------------------------------

  void sync_record(std::size_t slot_index) {
    const Slot& sl = slots_[slot_index];
    const AuctionState& st = sl.auction->state();
    AuctionRecord& rec = res_.auctions[sl.record];
    rec.final_bid = st.customer_bid;
    rec.selected.clear();
    for (const auto& d : st.selected) rec.selected.push_back(d.id);
    rec.thin_market = st.thin_market;
    rec.primary = st.primary;
    rec.secondary = st.secondary;
    rec.winning_bid = st.winning_bid;
    rec.phase = st.phase;
    rec.history = st.history;
    rec.failure = st.failure;
  }

  void finish() {
    if (auto d = locks_.find_overlap())
      require(false, "driver " + std::to_string(d->value) + " holds overlapping lockouts");
    require(res_.ledger.inflow == res_.ledger.outflow, "run ledger does not balance");

    std::array<std::vector<TradeRecord>, 5> per_type;
    for (std::size_t i = 0; i < res_.trades.size(); ++i)
      per_type[static_cast<std::size_t>(index_of(res_.trade_types[i]))].push_back(res_.trades[i]);
    for (std::size_t t = 0; t < 5; ++t) {
      const WelfareMetrics w = surplus_and_dwl(per_type[t]);
      TypeMetrics& m = res_.metrics[t];
      m.consumer_surplus = w.consumer_surplus;
      m.producer_surplus = w.producer_surplus;
      m.deadweight_loss = w.deadweight_loss;
      m.forgone = w.forgone;
    }
    TypeMetrics& tot = res_.totals;
    tot = TypeMetrics{};
    for (const TypeMetrics& m : res_.metrics) {
      tot.requests += m.requests;
      tot.declined += m.declined;
      tot.auctions += m.auctions;
      tot.thin_markets += m.thin_markets;
      tot.failed_no_supply += m.failed_no_supply;
      tot.failed_no_bids += m.failed_no_bids;
      tot.failed_no_feasible += m.failed_no_feasible;
      tot.cancelled += m.cancelled;
      tot.trades += m.trades;
      tot.bids += m.bids;
      tot.no_bids += m.no_bids;
      tot.rejected_bids += m.rejected_bids;
      tot.late_responses += m.late_responses;
      tot.customer_revisions += m.customer_revisions;
      tot.no_bid_fees += m.no_bid_fees;
      tot.no_bid_fee_total += m.no_bid_fee_total;
      tot.gross_price += m.gross_price;
      tot.consumer_surplus += m.consumer_surplus;
      tot.producer_surplus += m.producer_surplus;
      tot.deadweight_loss += m.deadweight_loss;
      tot.forgone += m.forgone;
      tot.regret += m.regret;
      tot.guarantee_discounts += m.guarantee_discounts;
      tot.fulfillment_fees += m.fulfillment_fees;
      tot.incentive_fees += m.incentive_fees;
      tot.late_drivers += m.late_drivers;
      tot.late_customers += m.late_customers;
      tot.gps_flags += m.gps_flags;
      tot.revenue_flags += m.revenue_flags;
      tot.platform_payoff += m.platform_payoff;
      tot.driver_payoff += m.driver_payoff;
      tot.platform_retention += m.platform_retention;
    }

    CollusionParams cp;
    cp.band = s_.integrity.collusion_band;
    cp.min_customers = s_.integrity.min_customers;
    cp.window = s_.integrity.collusion_window;
    res_.integrity.collusion = detect_bid_band_collusion(res_.log, cp);
    SyncLogoffParams sp;
    sp.delta = s_.integrity.logoff_delta;
    sp.min_occasions = s_.integrity.min_occasions;
    res_.integrity.sync_logoffs = detect_sync_logoff(logoff_observations(res_.log), sp);
    res_.integrity.gps_discrepancies = tot.gps_flags;
    res_.integrity.revenue_mismatches = tot.revenue_flags;
  }

  const Scenario& s_;
  const World& w_;
  RunMode mode_;
  RunResult res_;
  LockoutRegistry locks_;
  std::vector<DriverState> drivers_;
  std::vector<Slot> slots_;
  std::map<std::size_t, std::vector<std::size_t>> request_slots_;
  std::vector<RideTask> tasks_;
  std::map<std::size_t, std::vector<BeliefObservation>> pending_beliefs_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<Pending>> queue_;
  std::uint64_t seq_ = 0;
  std::int64_t next_ride_ = 0;
  Tick now_ = 0;
};

}  // namespace

RunResult run(const Scenario& scenario, const World& world, RunMode mode) {
  if (world.seed != scenario.seed)
    fail(ErrorKind::IncomparableBaseline, "world was generated from a different seed");
  return Engine(scenario, world, mode).run();
}

RunResult run(const Scenario& scenario, RunMode mode) {
  scenario.validate();
  const World world = generate_world(scenario);
  return run(scenario, world, mode);
}

}  // namespace bidride
