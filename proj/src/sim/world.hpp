#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "agents/agents.hpp"
#include "core/params.hpp"
#include "sim/scenario.hpp"

namespace bidride {

struct GeneratedDriver {
  DriverProfile profile;
  std::vector<std::pair<Tick, Seconds>> logoffs;  // (start, off-duty length)
};

struct GeneratedRequest {
  Tick tick = 0;
  MechanismType type = MechanismType::T2;
  CustomerRequest request;
  RouteEstimate route;
  double trip_km = 0.0;
  Money meter;            // uncapped meter fare for the route
  Money reference_cost;   // cheapest driver cost plus platform cost
  int siblings = 1;       // auctions opened for this request
  std::vector<GeoPoint> sibling_origins;
  std::uint64_t noise = 0;  // seed for per-driver and per-round draws
  Seconds driver_late = 0;
  Seconds customer_late = 0;
  double gps_inflation = 0.0;
};

/// Every random quantity of a run, drawn up front from one generator in a
/// fixed order. The mechanism and the fixed-price baseline share a World.
struct World {
  std::uint64_t seed = 0;
  std::vector<GeneratedDriver> drivers;
  std::vector<GeneratedRequest> requests;
};

World generate_world(const Scenario& s);

/// Deterministic uniform in [0, 1) derived from a request's noise seed and a
/// small key.
double derived_uniform(std::uint64_t noise, std::uint64_t a, std::uint64_t b, std::uint64_t c);

/// Route estimate used for quoting: straight-line distance at the reference
/// speed (midpoint of the fleet speed range).
RouteEstimate estimate_route(GeoPoint from, GeoPoint to, double reference_speed_kmh);

}  // namespace bidride
