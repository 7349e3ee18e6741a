#pragma once

// Seeded generators for detector fixtures, plus brute-force restatements of
// the detector predicates.

#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "core/event_log.hpp"
#include "integrity/collusion.hpp"

namespace synth {

struct BidLogSpec {
  int neighborhoods = 2;
  int drivers_per_hood = 8;
  int customers_per_hood = 12;
  int min_bidders = 3;
  int max_bidders = 5;
  bidride::Seconds span = bidride::hours(24);
};

struct PlantedGroup {
  int neighborhood = 0;
  std::set<std::int64_t> drivers;
};

struct BidLog {
  bidride::EventLog log;
  std::vector<PlantedGroup> planted;
};

// Independent bidders: each bid uniform over [0.7, 1.3] times the customer's
// reference price.
BidLog independent_bids(std::mt19937_64& rng, const BidLogSpec& spec = {});

// Independent background plus one group of `members` drivers bidding within
// +/- 5% of the median on `customers` customers inside one window.
BidLog planted_bids(std::mt19937_64& rng, int members = 4, int customers = 6,
                    const BidLogSpec& spec = {});

// Checks the flagged group literally: same neighborhood, at least
// min_customers customers inside one window on which every member's latest
// bid is within the band of that customer's median.
bool group_satisfies_predicate(const bidride::EventLog& log, const bidride::CollusionGroup& g,
                               const bidride::CollusionParams& params);

struct LogoffLog {
  bidride::EventLog log;
  int drivers = 0;
};

LogoffLog random_logoffs(std::mt19937_64& rng, bidride::Seconds delta);

// Maximum one-to-one matching of two drivers' logoff times within delta, by
// augmenting paths over the full bipartite graph.
int max_co_logoffs(const std::vector<bidride::Tick>& a, const std::vector<bidride::Tick>& b,
                   bidride::Seconds delta);

// Copy of `log` with `extra` inserted before event `before` (or at the end),
// retimed to its neighbour so ticks stay ordered.
bidride::EventLog with_injected(const bidride::EventLog& log, std::size_t before,
                                bidride::Event extra);

}  // namespace synth
