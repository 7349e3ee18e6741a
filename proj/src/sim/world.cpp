#include "sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "payoffs/payoffs.hpp"

namespace bidride {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    if (hi <= lo) return lo;
    return lo + (hi - lo) * unit();
  }
  double uniform(const Range& r) { return uniform(r.min, r.max); }
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {  // inclusive
    if (hi <= lo) return lo;
    return lo + static_cast<std::int64_t>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double normal() {
    // Box-Muller on our own uniforms keeps the stream layout fixed.
    double u1 = unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
  }
  double exponential(double rate) {
    double u = unit();
    if (u <= 0.0) u = 0x1.0p-53;
    return -std::log(u) / rate;
  }
  std::uint64_t bits() { return rng_(); }

 private:
  std::mt19937_64 rng_;
};

Money cents_of(double v) { return Money::cents(std::llround(v)); }

GeoPoint random_point(Draw& d, const CityConfig& c) {
  return c.point_at(d.uniform(0.0, c.rows * c.cell_km), d.uniform(0.0, c.cols * c.cell_km));
}

}  // namespace

double derived_uniform(std::uint64_t noise, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(noise ^ splitmix64(a * 0x9e3779b97f4a7c15ull ^
                                                  splitmix64(b + 0x632be59bd9b4e019ull) ^
                                                  (c << 17)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

RouteEstimate estimate_route(GeoPoint from, GeoPoint to, double reference_speed_kmh) {
  const double km = distance_km(from, to);
  RouteEstimate r;
  r.distance_m = std::max<std::int64_t>(1, std::llround(km * 1000.0));
  r.duration = std::max<Seconds>(1, std::llround(km / reference_speed_kmh * 3600.0));
  return r;
}

World generate_world(const Scenario& s) {
  World w;
  w.seed = s.seed;
  Draw d(s.seed);
  const FleetConfig& f = s.fleet;

  for (int i = 0; i < f.drivers; ++i) {
    GeneratedDriver g;
    DriverProfile& p = g.profile;
    p.id = DriverId(i);
    p.location = random_point(d, s.city);
    p.neighborhood = s.city.neighborhood_of(p.location);
    p.speed_kmh = d.uniform(f.speed_kmh);
    p.quality = d.uniform(f.quality);
    p.cost_per_km = cents_of(d.uniform(f.cost_per_km));
    p.fixed_cost = cents_of(d.uniform(f.fixed_cost));
    p.margin = cents_of(d.uniform(f.margin));
    p.auto_rate = f.auto_rate;
    p.priority_fraction = Fraction::from_double(d.uniform(f.priority_fraction));
    p.standard_fraction = Fraction::from_double(d.uniform(f.standard_fraction));
    p.beliefs.psi_od = cents_of(d.uniform(f.initial_psi_od));
    p.beliefs.beta_od = Probability::from_double(f.initial_beta_od);
    if (f.logoffs_per_day > 0.0) {
      const double rate = f.logoffs_per_day / 86400.0;
      double t = d.exponential(rate);
      while (t < static_cast<double>(s.duration)) {
        const Seconds len = std::max<Seconds>(
            f.min_return, std::llround(d.uniform(f.off_duty_minutes) * 60.0));
        g.logoffs.emplace_back(static_cast<Tick>(std::ceil(t)), len);
        t += static_cast<double>(len) + d.exponential(rate);
      }
    }
    w.drivers.push_back(std::move(g));
  }

  double total_mix = 0.0;
  for (double m : s.mechanism_mix) total_mix += m;
  const double ref_speed = (f.speed_kmh.min + f.speed_kmh.max) / 2.0;
  const Money platform_cost = s.economics.platform_cost();

  if (s.demand.arrivals_per_hour > 0.0) {
    const double rate = s.demand.arrivals_per_hour / 3600.0;
    double t = d.exponential(rate);
    std::int64_t next_customer = 0;
    while (t < static_cast<double>(s.duration)) {
      GeneratedRequest r;
      r.tick = static_cast<Tick>(std::ceil(t));
      double pick = d.unit() * total_mix;
      r.type = MechanismType::T5;
      for (MechanismType type : kAllMechanisms) {
        const double m = s.mechanism_mix[static_cast<std::size_t>(index_of(type))];
        if (m > 0.0 && pick < m) {
          r.type = type;
          break;
        }
        pick -= m;
      }
      CustomerRequest& c = r.request;
      c.id = CustomerId(next_customer++);
      c.origin = random_point(d, s.city);
      c.destination = random_point(d, s.city);
      for (int tries = 0; tries < 16 && distance_km(c.origin, c.destination) < s.demand.min_trip_km;
           ++tries)
        c.destination = random_point(d, s.city);
      c.neighborhood = s.city.neighborhood_of(c.origin);
      r.route = estimate_route(c.origin, c.destination, ref_speed);
      r.trip_km = distance_km(c.origin, c.destination);
      r.meter = meter_fare(s.pricing_for(r.type).meter, r.route);
      const double mult = std::exp(s.demand.valuation_mu + s.demand.valuation_sigma * d.normal());
      c.valuation = max(Money::cents(1), cents_of(static_cast<double>(r.meter.cents()) * mult));
      c.policy.alpha = Fraction::from_double(d.uniform(s.demand.alpha));
      c.policy.shade = Fraction::from_double(d.uniform(s.demand.shade));
      c.patience = Probability::from_double(s.demand.patience);

      Money cheapest = Money::cents(std::numeric_limits<std::int64_t>::max() / 4);
      for (const GeneratedDriver& g : w.drivers) {
        const DriverEconomics e = ride_economics(g.profile, r.trip_km, Probability::zero());
        cheapest = min(cheapest, e.d_v + e.d_f);
      }
      r.reference_cost = w.drivers.empty() ? cheapest : cheapest + platform_cost;

      r.siblings = 1;
      if (d.chance(s.demand.multi_open_probability))
        r.siblings = static_cast<int>(d.integer(2, std::max(2, s.demand.multi_open_max)));
      r.siblings = std::min(r.siblings, std::max(1, s.demand.multi_open_max));
      r.sibling_origins.push_back(c.origin);
      for (int k = 1; k < r.siblings; ++k) {
        // Alternative pickup points within 100 m.
        const double bearing = d.uniform(0.0, 2.0 * 3.141592653589793);
        const double dist = d.uniform(0.0, 0.1);
        GeoPoint o = c.origin;
        o.lat += dist * std::cos(bearing) / 111.195;
        o.lon += dist * std::sin(bearing) /
                 (111.195 * std::cos(c.origin.lat * 3.141592653589793 / 180.0));
        r.sibling_origins.push_back(o);
      }

      r.noise = d.bits();
      r.driver_late = d.chance(s.ride.driver_late_probability)
                          ? d.integer(1, std::max<Seconds>(1, s.ride.driver_late_max))
                          : 0;
      r.customer_late = d.chance(s.ride.customer_late_probability)
                            ? d.integer(1, std::max<Seconds>(1, s.ride.customer_late_max))
                            : 0;
      r.gps_inflation = d.chance(s.ride.gps_inflation_probability)
                            ? d.uniform(s.ride.gps_inflation)
                            : 0.0;
      w.requests.push_back(std::move(r));
      t += d.exponential(rate);
    }
  }
  return w;
}

}  // namespace bidride
