#pragma once

#include <map>
#include <vector>

#include "core/event_log.hpp"
#include "core/ids.hpp"
#include "core/money.hpp"

namespace bidride {

// ---------------------------------------------------------------------------
// Bid-band collusion

struct BidObservation {
  Tick tick = 0;
  int neighborhood = 0;
  CustomerId customer;
  DriverId driver;
  Money price;
};

struct CollusionParams {
  Fraction band = Fraction::from_ppb(100'000'000);
  int min_customers = 5;
  Seconds window = hours(24);
};

struct CustomerEvidence {
  CustomerId customer;
  Tick tick = 0;          // first bid for the customer
  double median = 0.0;    // over every bid the customer received
  std::map<DriverId, Money> bids;  // group members only
};

struct CollusionGroup {
  int neighborhood = 0;
  std::vector<DriverId> drivers;  // ascending
  Tick window_start = 0;
  Tick window_end = 0;            // exclusive
  std::vector<CustomerEvidence> customers;

  friend bool operator==(const CollusionGroup& a, const CollusionGroup& b) {
    return a.neighborhood == b.neighborhood && a.drivers == b.drivers;
  }
};

/// Latest bid per (customer, driver). A customer's median is taken over all
/// those bids. A group of two or more drivers from one neighborhood is flagged
/// when, for at least min_customers customers whose first bid falls inside a
/// single window, every member bid within +/- band of that customer's median.
/// Only maximal groups are reported, ordered by neighborhood then members.
std::vector<CollusionGroup> detect_bid_band_collusion(
    const std::vector<BidObservation>& bids, const CollusionParams& params = {});

/// Joins driver_bid events with their ride's request event (neighborhood and
/// customer come from the request; drivers never see the customer id).
std::vector<BidObservation> bid_observations(const EventLog& log);

std::vector<CollusionGroup> detect_bid_band_collusion(const EventLog& log,
                                                      const CollusionParams& params = {});

/// Whether `price` lies within +/- band of the median of `all_bids`, in exact
/// integer arithmetic.
bool within_band(Money price, std::vector<Money> all_bids, Fraction band);

// ---------------------------------------------------------------------------
// Synchronized logoffs

struct LogoffObservation {
  Tick tick = 0;
  DriverId driver;
};

struct SyncLogoffParams {
  Seconds delta = 120;
  int min_occasions = 3;
};

struct SyncLogoffPair {
  DriverId a;  // a < b
  DriverId b;
  int occasions = 0;
  std::vector<std::pair<Tick, Tick>> matches;

  friend bool operator==(const SyncLogoffPair& x, const SyncLogoffPair& y) {
    return x.a == y.a && x.b == y.b && x.occasions == y.occasions;
  }
};

/// Occasions are a one-to-one pairing of the two drivers' logoffs with
/// |t_a - t_b| <= delta, maximized; a logoff counts towards at most one
/// occasion per pair. Pairs with at least min_occasions are returned.
std::vector<SyncLogoffPair> detect_sync_logoff(const std::vector<LogoffObservation>& logoffs,
                                               const SyncLogoffParams& params = {});

std::vector<LogoffObservation> logoff_observations(const EventLog& log);

/// Maximum number of disjoint pairs (a_i, b_j) with |a_i - b_j| <= delta.
/// Both inputs sorted ascending.
std::vector<std::pair<Tick, Tick>> co_occurrences(const std::vector<Tick>& a,
                                                  const std::vector<Tick>& b, Seconds delta);

}  // namespace bidride
