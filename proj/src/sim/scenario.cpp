#include "sim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "core/digest.hpp"
#include "core/json_fields.hpp"

#include "core/error.hpp"

namespace bidride {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

int CityConfig::neighborhood_of(GeoPoint p) const {
  const double north = (p.lat - origin.lat) * 111.195;
  const double east = (p.lon - origin.lon) * 111.195 * std::cos(origin.lat * std::numbers::pi / 180.0);
  int r = static_cast<int>(std::floor(north / cell_km));
  int c = static_cast<int>(std::floor(east / cell_km));
  r = std::clamp(r, 0, rows - 1);
  c = std::clamp(c, 0, cols - 1);
  return (r / neighborhood_cells) * neighborhoods_per_row() + c / neighborhood_cells;
}

GeoPoint CityConfig::point_at(double north_km, double east_km) const {
  return {origin.lat + north_km / 111.195,
          origin.lon + east_km / (111.195 * std::cos(origin.lat * std::numbers::pi / 180.0))};
}

namespace {

using jsonio::field_error;
using jsonio::json;
using jsonio::Obj;

void read_range(Obj& o, std::string_view key, Range& out) {
  if (const json* v = o.find(key)) {
    Obj r(*v, o.at(key));
    r.number("min", out.min);
    r.number("max", out.max);
    r.finish();
    if (out.min > out.max) field_error(o.at(key), "min exceeds max");
  }
}

void read_pricing(Obj& o, PricingParams& p, bool allow_overrides) {
  if (auto m = o.object("meter")) {
    m->money("flag_fall", p.meter.flag_fall);
    m->money("per_km", p.meter.per_km);
    m->money("per_minute", p.meter.per_minute);
    m->finish();
  }
  o.fraction("standard_cap_factor", p.standard_cap_factor);
  o.fraction("flex_band", p.flex_band);
  o.fraction("payout_fraction", p.payout_fraction);
  o.fraction("blackcar_payout_fraction", p.blackcar_payout_fraction);
  o.fraction("guarantee_discount", p.guarantee_discount);
  o.integer("min_selected", p.min_selected);
  o.integer("max_selected", p.max_selected);
  o.minutes_field("lockout_before_minutes", p.lockout_before);
  o.minutes_field("lockout_after_minutes", p.lockout_after);
  o.integer("bid_window_seconds", p.bid_window);
  o.minutes_field("revision_window_minutes", p.revision_window);
  o.money("no_bid_fee", p.no_bid_fee);
  o.boolean("charge_no_bid_fee", p.charge_no_bid_fee);
  if (allow_overrides) o.find("overrides");
}

void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) fail(ErrorKind::InvalidParameter, "field '" + path + "': " + what);
}

void check_range(const Range& r, const std::string& path, double lo, double hi) {
  check(r.min >= lo && r.max <= hi && r.min <= r.max, path,
        "must lie within [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}


}  // namespace

void Scenario::validate() const {
  check(format_version == kScenarioFormatVersion, "format_version",
        "unsupported version " + std::to_string(format_version));
  check(duration > 0, "duration_minutes", "must be positive");
  check(city.cell_km > 0.0, "city.cell_km", "must be positive");
  check(city.rows > 0 && city.cols > 0, "city", "rows and cols must be positive");
  check(city.neighborhood_cells > 0, "city.neighborhood_cells", "must be positive");
  check(std::abs(city.origin.lat) < 80.0 && std::abs(city.origin.lon) <= 180.0, "city.origin",
        "coordinates out of range");
  check(fleet.drivers >= 0, "fleet.drivers", "must be non-negative");
  check_range(fleet.speed_kmh, "fleet.speed_kmh", 1.0, 200.0);
  check_range(fleet.quality, "fleet.quality", 0.0, 1.0);
  check_range(fleet.cost_per_km, "fleet.cost_per_km", 0.0, 1e7);
  check_range(fleet.fixed_cost, "fleet.fixed_cost", 0.0, 1e9);
  check_range(fleet.margin, "fleet.margin", 0.0, 1e9);
  check(fleet.auto_rate >= 0.0 && fleet.auto_rate <= 1.0, "fleet.auto_rate", "must lie in [0, 1]");
  check_range(fleet.priority_fraction, "fleet.priority_fraction", 0.70, 0.99);
  check_range(fleet.standard_fraction, "fleet.standard_fraction", 0.0, 10.0);
  check_range(fleet.initial_psi_od, "fleet.initial_psi_od", 0.0, 1e9);
  check(fleet.initial_beta_od >= 0.0 && fleet.initial_beta_od <= 1.0, "fleet.initial_beta_od",
        "must lie in [0, 1]");
  check(fleet.logoffs_per_day >= 0.0, "fleet.logoffs_per_day", "must be non-negative");
  check_range(fleet.off_duty_minutes, "fleet.off_duty_minutes", 0.0, 1e6);
  check(fleet.min_return >= 0, "fleet.min_return_minutes", "must be non-negative");
  check(demand.arrivals_per_hour >= 0.0, "demand.arrivals_per_hour", "must be non-negative");
  check(demand.valuation_sigma >= 0.0, "demand.valuation_sigma", "must be non-negative");
  check_range(demand.alpha, "demand.alpha", 0.0, 1.0);
  check_range(demand.shade, "demand.shade", 0.0, 1.0);
  check(demand.patience >= 0.0 && demand.patience <= 1.0, "demand.patience", "must lie in [0, 1]");
  check(demand.min_trip_km >= 0.0, "demand.min_trip_km", "must be non-negative");
  check(demand.multi_open_probability >= 0.0 && demand.multi_open_probability <= 1.0,
        "demand.multi_open_probability", "must lie in [0, 1]");
  check(demand.multi_open_max >= 1 && demand.multi_open_max <= 3, "demand.multi_open_max",
        "must lie in [1, 3]");
  double mix = 0.0;
  for (double m : mechanism_mix) {
    check(m >= 0.0, "mechanism_mix", "weights must be non-negative");
    mix += m;
  }
  check(mix > 0.0, "mechanism_mix", "at least one weight must be positive");
  for (MechanismType t : kAllMechanisms) {
    const std::string path = "pricing." + std::string(to_string(t));
    check(pricing_for(t).mechanism_type == t, path, "mechanism type mismatch");
    try {
      pricing_for(t).validate();
    } catch (const Error& e) {
      fail(ErrorKind::InvalidParameter, "field '" + path + "': " + e.what());
    }
  }
  try {
    economics.validate();
  } catch (const Error& e) {
    fail(ErrorKind::InvalidParameter, std::string("field 'economics': ") + e.what());
  }
  check(brand_subsidy >= Money::zero(), "economics.brand_subsidy", "must be non-negative");
  try {
    guarantees.validate();
  } catch (const Error& e) {
    fail(ErrorKind::InvalidParameter, std::string("field 'guarantees': ") + e.what());
  }
  check(ride.driver_late_probability >= 0.0 && ride.driver_late_probability <= 1.0,
        "ride.driver_late_probability", "must lie in [0, 1]");
  check(ride.customer_late_probability >= 0.0 && ride.customer_late_probability <= 1.0,
        "ride.customer_late_probability", "must lie in [0, 1]");
  check(ride.gps_inflation_probability >= 0.0 && ride.gps_inflation_probability <= 1.0,
        "ride.gps_inflation_probability", "must lie in [0, 1]");
  check(ride.driver_late_max >= 0 && ride.customer_late_max >= 0, "ride",
        "lateness bounds must be non-negative");
  check_range(ride.gps_inflation, "ride.gps_inflation", -0.99, 10.0);
  check(ride.response_delay_max >= 1, "ride.response_delay_seconds_max", "must be at least 1");
  check(integrity.min_customers >= 1, "integrity.min_customers", "must be at least 1");
  check(integrity.collusion_window > 0, "integrity.collusion_window_hours", "must be positive");
  check(integrity.logoff_delta >= 0, "integrity.logoff_delta_seconds", "must be non-negative");
  check(integrity.min_occasions >= 1, "integrity.min_occasions", "must be at least 1");
  check(integrity.distance_tolerance >= 0.0, "integrity.distance_tolerance",
        "must be non-negative");
  check(integrity.revenue_tolerance >= 0.0, "integrity.revenue_tolerance",
        "must be non-negative");
  check(learning_rate <= Fraction::from_ppb(Fraction::kScale), "learning.lambda",
        "must lie in [0, 1]");
}

Scenario parse_scenario(std::string_view text) {
  const json root = jsonio::parse_text(text);
  Scenario s;
  Obj o(root, "");
  if (!o.has("format_version")) field_error("format_version", "missing");
  o.integer("format_version", s.format_version);
  if (s.format_version != kScenarioFormatVersion)
    field_error("format_version", "unsupported version " + std::to_string(s.format_version));
  o.integer("seed", s.seed);
  {
    double m = static_cast<double>(s.duration) / 60.0;
    o.number("duration_minutes", m);
    if (!(m > 0.0)) field_error("duration_minutes", "must be positive");
    s.duration = static_cast<Seconds>(std::llround(m * 60.0));
  }
  if (auto c = o.object("city")) {
    if (auto org = c->object("origin")) {
      org->number("lat", s.city.origin.lat);
      org->number("lon", s.city.origin.lon);
      org->finish();
    }
    c->number("cell_km", s.city.cell_km);
    c->integer("rows", s.city.rows);
    c->integer("cols", s.city.cols);
    c->integer("neighborhood_cells", s.city.neighborhood_cells);
    c->finish();
  }
  if (auto f = o.object("fleet")) {
    f->integer("drivers", s.fleet.drivers);
    read_range(*f, "speed_kmh", s.fleet.speed_kmh);
    read_range(*f, "quality", s.fleet.quality);
    read_range(*f, "cost_per_km", s.fleet.cost_per_km);
    read_range(*f, "fixed_cost", s.fleet.fixed_cost);
    read_range(*f, "margin", s.fleet.margin);
    f->probability("auto_rate", s.fleet.auto_rate);
    read_range(*f, "priority_fraction", s.fleet.priority_fraction);
    read_range(*f, "standard_fraction", s.fleet.standard_fraction);
    read_range(*f, "initial_psi_od", s.fleet.initial_psi_od);
    f->probability("initial_beta_od", s.fleet.initial_beta_od);
    f->number("logoffs_per_day", s.fleet.logoffs_per_day);
    read_range(*f, "off_duty_minutes", s.fleet.off_duty_minutes);
    f->minutes_field("min_return_minutes", s.fleet.min_return);
    f->finish();
  }
  if (auto d = o.object("demand")) {
    d->number("arrivals_per_hour", s.demand.arrivals_per_hour);
    d->number("valuation_mu", s.demand.valuation_mu);
    d->number("valuation_sigma", s.demand.valuation_sigma);
    read_range(*d, "alpha", s.demand.alpha);
    read_range(*d, "shade", s.demand.shade);
    d->probability("patience", s.demand.patience);
    d->number("min_trip_km", s.demand.min_trip_km);
    d->probability("multi_open_probability", s.demand.multi_open_probability);
    d->integer("multi_open_max", s.demand.multi_open_max);
    d->finish();
  }
  if (auto m = o.object("mechanism_mix")) {
    s.mechanism_mix.fill(0.0);
    for (MechanismType t : kAllMechanisms)
      m->number(to_string(t), s.mechanism_mix[static_cast<std::size_t>(index_of(t))]);
    m->finish();
  }
  if (auto p = o.object("pricing")) {
    for (MechanismType t : kAllMechanisms) {
      Obj common(p->raw(), "pricing");
      read_pricing(common, s.pricing[static_cast<std::size_t>(index_of(t))], true);
      common.finish();
    }
    if (auto ov = p->object("overrides")) {
      for (MechanismType t : kAllMechanisms)
        if (auto tp = ov->object(to_string(t))) {
          read_pricing(*tp, s.pricing[static_cast<std::size_t>(index_of(t))], false);
          tp->finish();
        }
      ov->finish();
    }
  }
  if (auto e = o.object("economics")) {
    e->money("beta_v", s.economics.beta_v);
    e->money("beta_f", s.economics.beta_f);
    e->money("psi_ob", s.economics.psi_ob);
    double ob = s.economics.beta_ob.value(), lb = s.economics.beta_lb.value(),
           id = s.economics.beta_id.value();
    e->probability("beta_ob", ob);
    e->probability("beta_lb", lb);
    e->probability("beta_id", id);
    s.economics.beta_ob = Probability::from_double(ob);
    s.economics.beta_lb = Probability::from_double(lb);
    s.economics.beta_id = Probability::from_double(id);
    e->fraction("taxes_rate", s.economics.taxes_rate);
    e->money("third_party_fee", s.economics.third_party_fee);
    e->money("brand_subsidy", s.brand_subsidy);
    e->finish();
  }
  if (auto g = o.object("guarantees")) {
    g->minutes_field("customer_grace_minutes", s.guarantees.customer_grace);
    if (const json* sched = g->find("fulfillment_fees")) {
      if (!sched->is_array()) field_error("guarantees.fulfillment_fees", "expected an array");
      s.guarantees.fulfillment_fees.clear();
      for (std::size_t i = 0; i < sched->size(); ++i) {
        Obj entry((*sched)[i], "guarantees.fulfillment_fees[" + std::to_string(i) + "]");
        Seconds at = 0;
        Money fee;
        if (!entry.has("late_minutes") || !entry.has("fee"))
          field_error("guarantees.fulfillment_fees[" + std::to_string(i) + "]",
                      "needs late_minutes and fee");
        entry.minutes_field("late_minutes", at);
        entry.money("fee", fee);
        entry.finish();
        s.guarantees.fulfillment_fees.emplace_back(at, fee);
      }
    }
    g->fraction("fulfillment_share", s.guarantees.fulfillment_share);
    g->money("incentive_fee", s.guarantees.incentive_fee);
    g->minutes_field("incentive_deadline_minutes", s.guarantees.incentive_deadline);
    g->finish();
  }
  if (auto r = o.object("ride")) {
    r->probability("driver_late_probability", s.ride.driver_late_probability);
    r->integer("driver_late_seconds_max", s.ride.driver_late_max);
    r->probability("customer_late_probability", s.ride.customer_late_probability);
    r->minutes_field("customer_late_minutes_max", s.ride.customer_late_max);
    r->probability("gps_inflation_probability", s.ride.gps_inflation_probability);
    read_range(*r, "gps_inflation", s.ride.gps_inflation);
    r->integer("response_delay_seconds_max", s.ride.response_delay_max);
    r->finish();
  }
  if (auto i = o.object("integrity")) {
    i->fraction("collusion_band", s.integrity.collusion_band);
    i->integer("min_customers", s.integrity.min_customers);
    double hrs = static_cast<double>(s.integrity.collusion_window) / 3600.0;
    i->number("collusion_window_hours", hrs);
    s.integrity.collusion_window = static_cast<Seconds>(std::llround(hrs * 3600.0));
    i->integer("logoff_delta_seconds", s.integrity.logoff_delta);
    i->integer("min_occasions", s.integrity.min_occasions);
    i->number("distance_tolerance", s.integrity.distance_tolerance);
    i->number("revenue_tolerance", s.integrity.revenue_tolerance);
    i->finish();
  }
  if (auto l = o.object("learning")) {
    l->fraction("lambda", s.learning_rate);
    l->finish();
  }
  if (const json* c = o.find("combinator")) {
    if (!c->is_string()) field_error("combinator", "expected a string");
    try {
      s.combinator = parse_combinator(c->get<std::string>());
    } catch (const Error& e) {
      field_error("combinator", e.what());
    }
  }
  o.boolean("check_invariants", s.check_invariants);
  o.finish();
  for (MechanismType t : kAllMechanisms)
    s.pricing[static_cast<std::size_t>(index_of(t))].mechanism_type = t;
  s.guarantees.discount_rate = s.pricing_for(MechanismType::T2).guarantee_discount;
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open scenario file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

namespace {

ordered_json range_json(const Range& r) { return ordered_json{{"min", r.min}, {"max", r.max}}; }

ordered_json pricing_json(const PricingParams& p) {
  ordered_json j;
  j["meter"] = ordered_json{{"flag_fall", p.meter.flag_fall.cents()},
                            {"per_km", p.meter.per_km.cents()},
                            {"per_minute", p.meter.per_minute.cents()}};
  j["standard_cap_factor"] = p.standard_cap_factor.ppb();
  j["flex_band"] = p.flex_band.ppb();
  j["payout_fraction"] = p.payout_fraction.ppb();
  j["blackcar_payout_fraction"] = p.blackcar_payout_fraction.ppb();
  j["guarantee_discount"] = p.guarantee_discount.ppb();
  j["min_selected"] = p.min_selected;
  j["max_selected"] = p.max_selected;
  j["lockout_before"] = p.lockout_before;
  j["lockout_after"] = p.lockout_after;
  j["bid_window"] = p.bid_window;
  j["revision_window"] = p.revision_window;
  j["no_bid_fee"] = p.no_bid_fee.cents();
  j["charge_no_bid_fee"] = p.charge_no_bid_fee;
  return j;
}

}  // namespace

std::string canonical_json(const Scenario& s) {
  ordered_json j;
  j["format_version"] = s.format_version;
  j["seed"] = s.seed;
  j["duration"] = s.duration;
  j["city"] = ordered_json{{"origin", {{"lat", s.city.origin.lat}, {"lon", s.city.origin.lon}}},
                           {"cell_km", s.city.cell_km},
                           {"rows", s.city.rows},
                           {"cols", s.city.cols},
                           {"neighborhood_cells", s.city.neighborhood_cells}};
  const FleetConfig& f = s.fleet;
  j["fleet"] = ordered_json{{"drivers", f.drivers},
                            {"speed_kmh", range_json(f.speed_kmh)},
                            {"quality", range_json(f.quality)},
                            {"cost_per_km", range_json(f.cost_per_km)},
                            {"fixed_cost", range_json(f.fixed_cost)},
                            {"margin", range_json(f.margin)},
                            {"auto_rate", f.auto_rate},
                            {"priority_fraction", range_json(f.priority_fraction)},
                            {"standard_fraction", range_json(f.standard_fraction)},
                            {"initial_psi_od", range_json(f.initial_psi_od)},
                            {"initial_beta_od", f.initial_beta_od},
                            {"logoffs_per_day", f.logoffs_per_day},
                            {"off_duty_minutes", range_json(f.off_duty_minutes)},
                            {"min_return", f.min_return}};
  const DemandConfig& d = s.demand;
  j["demand"] = ordered_json{{"arrivals_per_hour", d.arrivals_per_hour},
                             {"valuation_mu", d.valuation_mu},
                             {"valuation_sigma", d.valuation_sigma},
                             {"alpha", range_json(d.alpha)},
                             {"shade", range_json(d.shade)},
                             {"patience", d.patience},
                             {"min_trip_km", d.min_trip_km},
                             {"multi_open_probability", d.multi_open_probability},
                             {"multi_open_max", d.multi_open_max}};
  ordered_json mix, pricing;
  for (MechanismType t : kAllMechanisms) {
    mix[std::string(to_string(t))] = s.mechanism_mix[static_cast<std::size_t>(index_of(t))];
    pricing[std::string(to_string(t))] = pricing_json(s.pricing_for(t));
  }
  j["mechanism_mix"] = mix;
  j["pricing"] = pricing;
  const PlatformEconomics& e = s.economics;
  j["economics"] = ordered_json{{"beta_v", e.beta_v.cents()},
                                {"beta_f", e.beta_f.cents()},
                                {"psi_ob", e.psi_ob.cents()},
                                {"beta_ob", e.beta_ob.ppb()},
                                {"beta_lb", e.beta_lb.ppb()},
                                {"beta_id", e.beta_id.ppb()},
                                {"taxes_rate", e.taxes_rate.ppb()},
                                {"third_party_fee", e.third_party_fee.cents()},
                                {"brand_subsidy", s.brand_subsidy.cents()}};
  ordered_json sched = ordered_json::array();
  for (const auto& [at, fee] : s.guarantees.fulfillment_fees)
    sched.push_back(ordered_json{{"late", at}, {"fee", fee.cents()}});
  j["guarantees"] = ordered_json{{"discount_rate", s.guarantees.discount_rate.ppb()},
                                 {"customer_grace", s.guarantees.customer_grace},
                                 {"fulfillment_fees", sched},
                                 {"fulfillment_share", s.guarantees.fulfillment_share.ppb()},
                                 {"incentive_fee", s.guarantees.incentive_fee.cents()},
                                 {"incentive_deadline", s.guarantees.incentive_deadline}};
  const RideNoise& r = s.ride;
  j["ride"] = ordered_json{{"driver_late_probability", r.driver_late_probability},
                           {"driver_late_max", r.driver_late_max},
                           {"customer_late_probability", r.customer_late_probability},
                           {"customer_late_max", r.customer_late_max},
                           {"gps_inflation_probability", r.gps_inflation_probability},
                           {"gps_inflation", range_json(r.gps_inflation)},
                           {"response_delay_max", r.response_delay_max}};
  const IntegrityConfig& i = s.integrity;
  j["integrity"] = ordered_json{{"collusion_band", i.collusion_band.ppb()},
                                {"min_customers", i.min_customers},
                                {"collusion_window", i.collusion_window},
                                {"logoff_delta", i.logoff_delta},
                                {"min_occasions", i.min_occasions},
                                {"distance_tolerance", i.distance_tolerance},
                                {"revenue_tolerance", i.revenue_tolerance}};
  j["learning_rate"] = s.learning_rate.ppb();
  j["combinator"] = std::string(to_string(s.combinator));
  j["check_invariants"] = s.check_invariants;
  return j.dump();
}

std::string scenario_digest(const Scenario& s) { return fnv1a_hex(canonical_json(s)); }

}  // namespace bidride
