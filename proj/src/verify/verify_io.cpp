#include <fstream>
#include <sstream>

#include "core/digest.hpp"
#include "core/json_fields.hpp"
#include "verify/verify.hpp"

namespace bidride {

using jsonio::field_error;
using jsonio::json;
using jsonio::Obj;
using ordered_json = nlohmann::ordered_json;

namespace {

std::vector<Money> money_list(Obj& o, std::string_view key) {
  std::vector<Money> out;
  if (const json* v = o.find(key)) {
    if (!v->is_array()) field_error(o.at(key), "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& e = (*v)[i];
      if (!e.is_number_integer())
        field_error(o.at(key) + "[" + std::to_string(i) + "]", "expected an integer amount");
      out.push_back(Money::cents(e.get<std::int64_t>()));
    }
  }
  return out;
}

ordered_json money_array(const std::vector<Money>& v) {
  ordered_json a = ordered_json::array();
  for (Money m : v) a.push_back(m.cents());
  return a;
}

}  // namespace

SmallInstance parse_instance(std::string_view text) {
  const json root = jsonio::parse_text(text);
  Obj o(root, "");
  int version = 0;
  if (!o.has("format_version")) field_error("format_version", "missing");
  o.integer("format_version", version);
  if (version != kInstanceFormatVersion)
    field_error("format_version", "unsupported version " + std::to_string(version));

  SmallInstance inst;
  if (const json* t = o.find("type")) {
    if (!t->is_string()) field_error("type", "expected a string");
    auto mt = parse_mechanism(t->get<std::string>());
    if (!mt) field_error("type", "unknown mechanism type '" + t->get<std::string>() + "'");
    inst.type = *mt;
  } else {
    field_error("type", "missing");
  }
  inst.params = PricingParams::defaults_for(inst.type);
  for (const char* k : {"valuation", "standard"})
    if (!o.has(k)) field_error(k, "missing");
  o.money("valuation", inst.valuation);
  o.money("standard", inst.standard);
  o.money("base", inst.base);

  Money cap = inst.type == MechanismType::T2 ? inst.standard : inst.valuation;
  Money low = Money::zero();
  if (auto c = o.object("customer")) {
    c->money("cap", cap);
    c->money("low", low);
    inst.customer_caps = money_list(*c, "alternatives");
    c->finish();
  }
  inst.customer_bid = inst.type == MechanismType::T1 ? CustomerBid::range(low, cap)
                                                     : CustomerBid::single(cap);

  if (auto p = o.object("pricing")) {
    p->fraction("payout_fraction", inst.params.payout_fraction);
    p->fraction("blackcar_payout_fraction", inst.params.blackcar_payout_fraction);
    p->fraction("flex_band", inst.params.flex_band);
    p->money("no_bid_fee", inst.params.no_bid_fee);
    p->boolean("charge_no_bid_fee", inst.params.charge_no_bid_fee);
    p->finish();
  }
  if (auto e = o.object("economics")) {
    e->money("beta_v", inst.economics.beta_v);
    e->money("beta_f", inst.economics.beta_f);
    e->fraction("taxes_rate", inst.economics.taxes_rate);
    e->money("third_party_fee", inst.economics.third_party_fee);
    e->finish();
  }
  const std::vector<Money> shared = money_list(o, "levels");
  if (const json* ds = o.find("drivers")) {
    if (!ds->is_array()) field_error("drivers", "expected an array");
    for (std::size_t i = 0; i < ds->size(); ++i) {
      Obj d((*ds)[i], "drivers[" + std::to_string(i) + "]");
      SmallDriver sd;
      if (!d.has("cost")) field_error(d.at("cost"), "missing");
      d.money("cost", sd.cost);
      d.integer("eta", sd.eta);
      d.number("quality", sd.quality);
      sd.levels = d.has("levels") ? money_list(d, "levels") : shared;
      d.finish();
      inst.drivers.push_back(std::move(sd));
    }
  } else {
    field_error("drivers", "missing");
  }
  o.boolean("allow_no_bid", inst.allow_no_bid);
  if (auto s = o.object("search")) {
    s->integer("restarts", inst.restarts);
    s->integer("max_rounds", inst.max_rounds);
    s->integer("seed", inst.seed);
    s->finish();
  }
  o.finish();
  return inst;
}

SmallInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open instance file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

std::string instance_json(const SmallInstance& inst) {
  ordered_json j;
  j["format_version"] = kInstanceFormatVersion;
  j["type"] = std::string(to_string(inst.type));
  j["valuation"] = inst.valuation.cents();
  j["standard"] = inst.standard.cents();
  j["base"] = inst.base.cents();
  j["customer"] = {{"cap", inst.customer_bid.cap.cents()},
                   {"low", inst.customer_bid.low.cents()},
                   {"alternatives", money_array(inst.customer_caps)}};
  j["pricing"] = {{"payout_fraction", inst.params.payout_fraction.value()},
                  {"blackcar_payout_fraction", inst.params.blackcar_payout_fraction.value()},
                  {"flex_band", inst.params.flex_band.value()},
                  {"no_bid_fee", inst.params.no_bid_fee.cents()},
                  {"charge_no_bid_fee", inst.params.charge_no_bid_fee}};
  j["economics"] = {{"beta_v", inst.economics.beta_v.cents()},
                    {"beta_f", inst.economics.beta_f.cents()},
                    {"taxes_rate", inst.economics.taxes_rate.value()},
                    {"third_party_fee", inst.economics.third_party_fee.cents()}};
  ordered_json ds = ordered_json::array();
  for (const auto& d : inst.drivers)
    ds.push_back({{"cost", d.cost.cents()},
                  {"eta", d.eta},
                  {"quality", d.quality},
                  {"levels", money_array(d.levels)}});
  j["drivers"] = ds;
  j["allow_no_bid"] = inst.allow_no_bid;
  j["search"] = {{"restarts", inst.restarts}, {"max_rounds", inst.max_rounds}, {"seed", inst.seed}};
  return j.dump(2) + "\n";
}

namespace {

ordered_json opt_money(const std::optional<Money>& m) {
  return m ? ordered_json(m->cents()) : ordered_json(nullptr);
}

ordered_json witness_json(const std::optional<Witness>& w) {
  if (!w) return nullptr;
  return {{"party", w->party},
          {"profile", w->profile},
          {"customer_cap", opt_money(w->customer_cap)},
          {"deviation", opt_money(w->deviation)},
          {"note", w->note}};
}

ordered_json allocation_json(const Allocation& a) {
  return {{"driver", a.driver ? ordered_json(*a.driver) : ordered_json(nullptr)},
          {"price", a.price.cents()}};
}

std::optional<Money> read_opt_money(Obj& o, std::string_view key) {
  const json* v = o.find(key);
  if (!v) field_error(o.at(key), "missing");
  if (v->is_null()) return std::nullopt;
  if (!v->is_number_integer()) field_error(o.at(key), "expected an integer or null");
  return Money::cents(v->get<std::int64_t>());
}

Profile read_profile(const json& v, const std::string& path) {
  if (!v.is_array()) field_error(path, "expected an array");
  Profile p;
  for (const auto& e : v) {
    if (!e.is_number_integer()) field_error(path, "expected integers");
    p.push_back(e.get<int>());
  }
  return p;
}

std::vector<Profile> read_profiles(Obj& o, std::string_view key) {
  const json* v = o.find(key);
  if (!v || !v->is_array()) field_error(o.at(key), "expected an array");
  std::vector<Profile> out;
  for (std::size_t i = 0; i < v->size(); ++i)
    out.push_back(read_profile((*v)[i], o.at(key) + "[" + std::to_string(i) + "]"));
  return out;
}

std::optional<Witness> read_witness(Obj& o, std::string_view key) {
  const json* v = o.find(key);
  if (!v) field_error(o.at(key), "missing");
  if (v->is_null()) return std::nullopt;
  Obj w(*v, o.at(key));
  Witness out;
  w.integer("party", out.party);
  const json* p = w.find("profile");
  if (!p) field_error(w.at("profile"), "missing");
  out.profile = read_profile(*p, w.at("profile"));
  out.customer_cap = read_opt_money(w, "customer_cap");
  out.deviation = read_opt_money(w, "deviation");
  if (const json* n = w.find("note")) {
    if (!n->is_string()) field_error(w.at("note"), "expected a string");
    out.note = n->get<std::string>();
  }
  w.finish();
  return out;
}

Allocation read_allocation(const json& v, const std::string& path) {
  Obj o(v, path);
  Allocation a;
  const json* d = o.find("driver");
  if (!d) field_error(o.at("driver"), "missing");
  if (!d->is_null()) {
    if (!d->is_number_integer()) field_error(o.at("driver"), "expected an integer or null");
    a.driver = d->get<int>();
  }
  o.money("price", a.price);
  o.finish();
  return a;
}

void read_flag(Obj& o, std::string_view key, bool& pass, std::optional<Witness>& w) {
  auto f = o.object(key);
  if (!f) field_error(o.at(key), "missing");
  f->boolean("pass", pass);
  w = read_witness(*f, "witness");
  f->finish();
}

}  // namespace

std::string report_json(const SmallInstance& inst, const PropertyReport& r) {
  ordered_json j;
  j["format_version"] = kInstanceFormatVersion;
  j["instance_digest"] = fnv1a_hex(instance_json(inst));
  j["type"] = std::string(to_string(inst.type));
  j["drivers"] = inst.drivers.size();
  j["profiles_enumerated"] = r.profiles_enumerated;
  j["ir_buyer"] = {{"pass", r.ir_buyer}, {"witness", witness_json(r.ir_buyer_witness)}};
  j["ir_seller"] = {{"pass", r.ir_seller}, {"witness", witness_json(r.ir_seller_witness)}};
  j["sbb"] = {{"pass", r.sbb}, {"witness", witness_json(r.sbb_witness)}};
  j["dsic_gap"] = r.dsic_gap.cents();
  j["dsic_witness"] = witness_json(r.dsic_witness);
  j["pareto"] = {{"pass", r.pareto},
                 {"dominating", r.pareto_dominating ? allocation_json(*r.pareto_dominating)
                                                    : ordered_json(nullptr)}};
  j["truthful_allocation"] = allocation_json(r.truthful_allocation);
  j["welfare"] = {{"realized", r.realized_welfare.cents()},
                  {"maximum", r.max_welfare.cents()},
                  {"ratio", r.welfare_ratio}};
  j["fixed_points"] = r.fixed_points;
  ordered_json rs = ordered_json::array();
  for (const auto& x : r.restarts)
    rs.push_back({{"start", x.start},
                  {"fixed_point", x.fixed_point ? ordered_json(*x.fixed_point) : ordered_json(nullptr)},
                  {"rounds", x.rounds}});
  j["restarts"] = rs;
  j["pure_nash"] = r.pure_nash;
  j["unique_pure_nash"] = r.unique_pure_nash;
  return j.dump(2) + "\n";
}

PropertyReport parse_report(std::string_view text) {
  const json root = jsonio::parse_text(text);
  Obj o(root, "");
  int version = 0;
  o.integer("format_version", version);
  if (version != kInstanceFormatVersion)
    field_error("format_version", "unsupported version " + std::to_string(version));
  o.find("instance_digest");
  o.find("type");
  o.find("drivers");
  PropertyReport r;
  o.integer("profiles_enumerated", r.profiles_enumerated);
  read_flag(o, "ir_buyer", r.ir_buyer, r.ir_buyer_witness);
  read_flag(o, "ir_seller", r.ir_seller, r.ir_seller_witness);
  read_flag(o, "sbb", r.sbb, r.sbb_witness);
  o.money("dsic_gap", r.dsic_gap);
  r.dsic_witness = read_witness(o, "dsic_witness");
  if (auto p = o.object("pareto")) {
    p->boolean("pass", r.pareto);
    const json* d = p->find("dominating");
    if (d && !d->is_null()) r.pareto_dominating = read_allocation(*d, p->at("dominating"));
    p->finish();
  }
  if (const json* a = o.find("truthful_allocation"))
    r.truthful_allocation = read_allocation(*a, "truthful_allocation");
  if (auto w = o.object("welfare")) {
    w->money("realized", r.realized_welfare);
    w->money("maximum", r.max_welfare);
    w->number("ratio", r.welfare_ratio);
    w->finish();
  }
  r.fixed_points = read_profiles(o, "fixed_points");
  if (const json* rs = o.find("restarts")) {
    if (!rs->is_array()) field_error("restarts", "expected an array");
    for (std::size_t i = 0; i < rs->size(); ++i) {
      Obj x((*rs)[i], "restarts[" + std::to_string(i) + "]");
      RestartResult rr;
      const json* s = x.find("start");
      if (!s) field_error(x.at("start"), "missing");
      rr.start = read_profile(*s, x.at("start"));
      const json* f = x.find("fixed_point");
      if (f && !f->is_null()) rr.fixed_point = read_profile(*f, x.at("fixed_point"));
      x.integer("rounds", rr.rounds);
      x.finish();
      r.restarts.push_back(std::move(rr));
    }
  }
  r.pure_nash = read_profiles(o, "pure_nash");
  o.boolean("unique_pure_nash", r.unique_pure_nash);
  o.finish();
  return r;
}

}  // namespace bidride
