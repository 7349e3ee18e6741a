#include "integrity/collusion.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <set>
#include <unordered_map>

namespace bidride {

namespace {

// Twice the median, so even-sized samples stay integral.
std::int64_t twice_median(std::vector<Money>& prices) {
  std::sort(prices.begin(), prices.end());
  const std::size_t n = prices.size();
  if (n % 2 == 1) return 2 * prices[n / 2].cents();
  return prices[n / 2 - 1].cents() + prices[n / 2].cents();
}

bool in_band(Money price, std::int64_t m2, Fraction band) {
  __int128 diff = static_cast<__int128>(2) * price.cents() - m2;
  if (diff < 0) diff = -diff;
  return diff * Fraction::kScale <= static_cast<__int128>(band.ppb()) * m2;
}

using Bits = std::vector<std::uint64_t>;

int popcount(const Bits& b) {
  int n = 0;
  for (auto w : b) n += std::popcount(w);
  return n;
}

Bits intersect(const Bits& a, const Bits& b) {
  Bits out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] & b[i];
  return out;
}

struct CustomerRecord {
  CustomerId id;
  int neighborhood = 0;
  Tick first_tick = 0;
  std::map<DriverId, Money> latest;
  std::map<DriverId, Tick> latest_tick;
  std::int64_t m2 = 0;
  std::set<DriverId> in_band;
};

struct GroupFinder {
  const std::vector<DriverId>& drivers;
  const std::vector<Bits>& sets;
  int k;
  std::vector<std::pair<std::vector<int>, Bits>> found;

  void extend(std::vector<int>& group, const Bits& inter, std::size_t start) {
    bool maximal = true;
    for (std::size_t c = 0; c < drivers.size(); ++c) {
      if (std::find(group.begin(), group.end(), static_cast<int>(c)) != group.end()) continue;
      const Bits next = intersect(inter, sets[c]);
      if (popcount(next) < k) continue;
      maximal = false;
      if (c < start) continue;
      group.push_back(static_cast<int>(c));
      extend(group, next, c + 1);
      group.pop_back();
    }
    if (maximal && group.size() >= 2) found.emplace_back(group, inter);
  }
};

}  // namespace

bool within_band(Money price, std::vector<Money> all_bids, Fraction band) {
  if (all_bids.empty()) return false;
  return in_band(price, twice_median(all_bids), band);
}

std::vector<CollusionGroup> detect_bid_band_collusion(const std::vector<BidObservation>& bids,
                                                      const CollusionParams& params) {
  std::map<CustomerId, CustomerRecord> customers;
  for (const BidObservation& b : bids) {
    auto [it, fresh] = customers.try_emplace(b.customer);
    CustomerRecord& r = it->second;
    if (fresh) {
      r.id = b.customer;
      r.neighborhood = b.neighborhood;
      r.first_tick = b.tick;
    }
    r.first_tick = std::min(r.first_tick, b.tick);
    auto t = r.latest_tick.find(b.driver);
    if (t == r.latest_tick.end() || t->second <= b.tick) {
      r.latest[b.driver] = b.price;
      r.latest_tick[b.driver] = b.tick;
    }
  }

  std::map<int, std::vector<CustomerRecord*>> by_hood;
  for (auto& [id, r] : customers) {
    std::vector<Money> prices;
    for (const auto& [d, p] : r.latest) prices.push_back(p);
    r.m2 = twice_median(prices);
    for (const auto& [d, p] : r.latest)
      if (in_band(p, r.m2, params.band)) r.in_band.insert(d);
    by_hood[r.neighborhood].push_back(&r);
  }

  std::vector<CollusionGroup> out;
  for (auto& [hood, recs] : by_hood) {
    std::sort(recs.begin(), recs.end(), [](const CustomerRecord* a, const CustomerRecord* b) {
      return a->first_tick != b->first_tick ? a->first_tick < b->first_tick : a->id < b->id;
    });
    std::map<std::vector<DriverId>, CollusionGroup> groups;
    std::size_t prev_end = 0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const Tick start = recs[i]->first_tick;
      std::size_t end = i;
      while (end < recs.size() && recs[end]->first_tick < start + params.window) ++end;
      if (i > 0 && end <= prev_end) continue;  // subset of the previous window
      prev_end = end;
      const std::size_t n = end - i;
      if (static_cast<int>(n) < params.min_customers) continue;

      std::map<DriverId, Bits> sets;
      for (std::size_t c = i; c < end; ++c)
        for (DriverId d : recs[c]->in_band) {
          Bits& b = sets[d];
          if (b.empty()) b.assign((n + 63) / 64, 0);
          b[(c - i) / 64] |= std::uint64_t{1} << ((c - i) % 64);
        }
      std::vector<DriverId> cand;
      std::vector<Bits> cand_sets;
      for (auto& [d, b] : sets)
        if (popcount(b) >= params.min_customers) {
          cand.push_back(d);
          cand_sets.push_back(std::move(b));
        }
      if (cand.size() < 2) continue;

      GroupFinder finder{cand, cand_sets, params.min_customers, {}};
      std::vector<int> group;
      Bits all((n + 63) / 64, ~std::uint64_t{0});
      finder.extend(group, all, 0);
      for (const auto& [members, inter] : finder.found) {
        std::vector<DriverId> ids;
        for (int m : members) ids.push_back(cand[static_cast<std::size_t>(m)]);
        std::sort(ids.begin(), ids.end());
        if (groups.contains(ids)) continue;
        CollusionGroup g;
        g.neighborhood = hood;
        g.drivers = ids;
        g.window_start = start;
        g.window_end = start + params.window;
        for (std::size_t c = 0; c < n; ++c) {
          if (!((inter[c / 64] >> (c % 64)) & 1)) continue;
          const CustomerRecord& r = *recs[i + c];
          CustomerEvidence ev;
          ev.customer = r.id;
          ev.tick = r.first_tick;
          ev.median = static_cast<double>(r.m2) / 2.0;
          for (DriverId d : ids) ev.bids[d] = r.latest.at(d);
          g.customers.push_back(std::move(ev));
        }
        groups.emplace(ids, std::move(g));
      }
    }
    // Drop groups contained in a larger group found in another window.
    for (auto& [ids, g] : groups) {
      bool contained = false;
      for (const auto& [other, og] : groups) {
        if (other.size() <= ids.size()) continue;
        if (std::includes(other.begin(), other.end(), ids.begin(), ids.end())) {
          contained = true;
          break;
        }
      }
      if (!contained) out.push_back(std::move(g));
    }
  }
  return out;
}

std::vector<BidObservation> bid_observations(const EventLog& log) {
  struct RideInfo {
    int neighborhood = 0;
    CustomerId customer;
  };
  std::unordered_map<std::int64_t, RideInfo> rides;
  std::vector<BidObservation> out;
  for (const Event& e : log.events()) {
    if (e.kind == "request") {
      auto c = e.get_int("customer");
      auto n = e.get_int("neighborhood");
      if (c && n && e.ride.valid())
        rides[e.ride.value] = {static_cast<int>(*n), CustomerId(*c)};
    } else if (e.kind == "driver_bid") {
      auto it = rides.find(e.ride.value);
      auto d = e.get_int("driver");
      auto p = e.get_int("price");
      if (it == rides.end() || !d || !p) continue;
      out.push_back({e.tick, it->second.neighborhood, it->second.customer, DriverId(*d),
                     Money::cents(*p)});
    }
  }
  return out;
}

std::vector<CollusionGroup> detect_bid_band_collusion(const EventLog& log,
                                                      const CollusionParams& params) {
  return detect_bid_band_collusion(bid_observations(log), params);
}

std::vector<std::pair<Tick, Tick>> co_occurrences(const std::vector<Tick>& a,
                                                  const std::vector<Tick>& b, Seconds delta) {
  std::vector<std::pair<Tick, Tick>> out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const Tick d = a[i] - b[j];
    if (d <= delta && -d <= delta) {
      out.emplace_back(a[i], b[j]);
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

std::vector<SyncLogoffPair> detect_sync_logoff(const std::vector<LogoffObservation>& logoffs,
                                               const SyncLogoffParams& params) {
  std::map<DriverId, std::vector<Tick>> ticks;
  for (const LogoffObservation& l : logoffs) ticks[l.driver].push_back(l.tick);
  std::vector<std::pair<DriverId, std::vector<Tick>>> drivers;
  for (auto& [d, t] : ticks) {
    std::sort(t.begin(), t.end());
    if (static_cast<int>(t.size()) >= params.min_occasions) drivers.emplace_back(d, t);
  }
  std::vector<SyncLogoffPair> out;
  for (std::size_t i = 0; i < drivers.size(); ++i)
    for (std::size_t j = i + 1; j < drivers.size(); ++j) {
      auto m = co_occurrences(drivers[i].second, drivers[j].second, params.delta);
      if (static_cast<int>(m.size()) < params.min_occasions) continue;
      SyncLogoffPair p;
      p.a = drivers[i].first;
      p.b = drivers[j].first;
      p.occasions = static_cast<int>(m.size());
      p.matches = std::move(m);
      out.push_back(std::move(p));
    }
  return out;
}

std::vector<LogoffObservation> logoff_observations(const EventLog& log) {
  std::vector<LogoffObservation> out;
  for (const Event& e : log.events()) {
    if (e.kind != "logoff") continue;
    if (auto d = e.get_int("driver")) out.push_back({e.tick, DriverId(*d)});
  }
  return out;
}

}  // namespace bidride
