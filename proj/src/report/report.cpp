#include "report/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include <boost/math/distributions/binomial.hpp>

#include "core/json_fields.hpp"

namespace bidride {

using jsonio::field_error;
using jsonio::json;
using jsonio::Obj;
using ordered_json = nlohmann::ordered_json;

bool operator==(const RunFailure& a, const RunFailure& b) {
  return a.seed == b.seed && a.tick == b.tick && a.message == b.message;
}

namespace {

// Single field list shared by the report, the CSV table and both parsers.
template <typename M, typename F>
void for_each_metric(M& m, F&& f) {
  f("requests", m.requests);
  f("declined", m.declined);
  f("auctions", m.auctions);
  f("thin_markets", m.thin_markets);
  f("failed_no_supply", m.failed_no_supply);
  f("failed_no_bids", m.failed_no_bids);
  f("failed_no_feasible", m.failed_no_feasible);
  f("cancelled", m.cancelled);
  f("trades", m.trades);
  f("bids", m.bids);
  f("no_bids", m.no_bids);
  f("rejected_bids", m.rejected_bids);
  f("late_responses", m.late_responses);
  f("customer_revisions", m.customer_revisions);
  f("no_bid_fees", m.no_bid_fees);
  f("no_bid_fee_total", m.no_bid_fee_total);
  f("gross_price", m.gross_price);
  f("consumer_surplus", m.consumer_surplus);
  f("producer_surplus", m.producer_surplus);
  f("deadweight_loss", m.deadweight_loss);
  f("forgone", m.forgone);
  f("regret", m.regret);
  f("guarantee_discounts", m.guarantee_discounts);
  f("fulfillment_fees", m.fulfillment_fees);
  f("incentive_fees", m.incentive_fees);
  f("late_drivers", m.late_drivers);
  f("late_customers", m.late_customers);
  f("gps_flags", m.gps_flags);
  f("revenue_flags", m.revenue_flags);
  f("platform_payoff", m.platform_payoff);
  f("driver_payoff", m.driver_payoff);
  f("platform_retention", m.platform_retention);
}

template <typename T>
std::int64_t raw(const T& v) {
  if constexpr (std::is_same_v<std::decay_t<T>, Money>)
    return v.cents();
  else
    return static_cast<std::int64_t>(v);
}

template <typename T>
void assign(T& out, std::int64_t v) {
  if constexpr (std::is_same_v<T, Money>)
    out = Money::cents(v);
  else
    out = static_cast<T>(v);
}

ordered_json metrics_json(const TypeMetrics& m) {
  ordered_json j = ordered_json::object();
  for_each_metric(m, [&](const char* name, const auto& v) { j[name] = raw(v); });
  return j;
}

TypeMetrics read_metrics(Obj& o) {
  TypeMetrics m;
  for_each_metric(m, [&](const char* name, auto& v) {
    if (!o.has(name)) field_error(o.at(name), "missing");
    std::int64_t x = 0;
    o.integer(name, x);
    assign(v, x);
  });
  o.finish();
  return m;
}

ordered_json money_map(const std::map<std::string, Money>& m) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : m) j[k] = v.cents();
  return j;
}

std::map<std::string, Money> read_money_map(Obj& parent, std::string_view key) {
  std::map<std::string, Money> out;
  const json* v = parent.find(key);
  if (!v) field_error(parent.at(key), "missing");
  if (!v->is_object()) field_error(parent.at(key), "expected an object");
  for (auto it = v->begin(); it != v->end(); ++it) {
    if (!it->is_number_integer()) field_error(parent.at(key) + "." + it.key(), "expected an integer");
    out[it.key()] = Money::cents(it->get<std::int64_t>());
  }
  return out;
}

}  // namespace

RunReport make_report(const RunResult& r) {
  RunReport rep;
  rep.scenario_digest = r.scenario_digest;
  rep.seed = r.seed;
  rep.mode = r.mode;
  rep.failure = r.failure;
  rep.events = static_cast<std::int64_t>(r.log.size());
  rep.auctions = static_cast<std::int64_t>(r.auctions.size());
  rep.rides = static_cast<std::int64_t>(r.rides.size());
  rep.metrics = r.metrics;
  rep.totals = r.totals;
  for (const auto& g : r.integrity.collusion) {
    CollusionSummary s;
    s.neighborhood = g.neighborhood;
    for (DriverId d : g.drivers) s.drivers.push_back(d.value);
    s.window_start = g.window_start;
    s.window_end = g.window_end;
    s.customers = static_cast<std::int64_t>(g.customers.size());
    rep.collusion.push_back(std::move(s));
  }
  for (const auto& p : r.integrity.sync_logoffs)
    rep.sync_logoffs.push_back({p.a.value, p.b.value, p.occasions});
  rep.gps_discrepancies = r.integrity.gps_discrepancies;
  rep.revenue_mismatches = r.integrity.revenue_mismatches;
  rep.ledgers = r.ledger.ledgers;
  rep.unbalanced_ledgers = r.ledger.unbalanced;
  rep.inflow = r.ledger.inflow;
  rep.outflow = r.ledger.outflow;
  rep.by_reason = r.ledger.by_reason;
  rep.inflow_by_party = r.ledger.inflow_by_party;
  rep.outflow_by_party = r.ledger.outflow_by_party;
  return rep;
}

std::string write_report(const RunReport& r) {
  ordered_json j;
  j["format_version"] = r.format_version;
  j["scenario_digest"] = r.scenario_digest;
  j["seed"] = r.seed;
  j["mode"] = std::string(to_string(r.mode));
  j["status"] = r.failure ? "aborted" : "ok";
  if (r.failure)
    j["failure"] = {{"seed", r.failure->seed}, {"tick", r.failure->tick}, {"message", r.failure->message}};
  else
    j["failure"] = nullptr;
  j["events"] = r.events;
  j["auctions"] = r.auctions;
  j["rides"] = r.rides;
  ordered_json m = ordered_json::object();
  for (MechanismType t : kAllMechanisms)
    m[std::string(to_string(t))] = metrics_json(r.metrics[static_cast<std::size_t>(index_of(t))]);
  m["total"] = metrics_json(r.totals);
  j["metrics"] = m;
  ordered_json groups = ordered_json::array();
  for (const auto& g : r.collusion)
    groups.push_back({{"neighborhood", g.neighborhood},
                      {"drivers", g.drivers},
                      {"window_start", g.window_start},
                      {"window_end", g.window_end},
                      {"customers", g.customers}});
  ordered_json pairs = ordered_json::array();
  for (const auto& p : r.sync_logoffs)
    pairs.push_back({{"a", p.a}, {"b", p.b}, {"occasions", p.occasions}});
  j["integrity"] = {{"collusion_groups", groups},
                    {"sync_logoff_pairs", pairs},
                    {"gps_discrepancies", r.gps_discrepancies},
                    {"revenue_mismatches", r.revenue_mismatches}};
  j["ledger"] = {{"ledgers", r.ledgers},
                 {"unbalanced", r.unbalanced_ledgers},
                 {"inflow", r.inflow.cents()},
                 {"outflow", r.outflow.cents()},
                 {"by_reason", money_map(r.by_reason)},
                 {"inflow_by_party", money_map(r.inflow_by_party)},
                 {"outflow_by_party", money_map(r.outflow_by_party)}};
  return j.dump(2) + "\n";
}

RunReport parse_report_json(std::string_view text) {
  const json root = jsonio::parse_text(text);
  Obj o(root, "");
  RunReport r;
  o.integer("format_version", r.format_version);
  if (r.format_version != kReportFormatVersion)
    field_error("format_version", "unsupported version " + std::to_string(r.format_version));
  if (const json* d = o.find("scenario_digest")) {
    if (!d->is_string()) field_error("scenario_digest", "expected a string");
    r.scenario_digest = d->get<std::string>();
  }
  o.integer("seed", r.seed);
  if (const json* m = o.find("mode")) {
    if (*m == "mechanism")
      r.mode = RunMode::Mechanism;
    else if (*m == "baseline")
      r.mode = RunMode::Baseline;
    else
      field_error("mode", "expected \"mechanism\" or \"baseline\"");
  }
  o.find("status");
  if (const json* f = o.find("failure"); f && !f->is_null()) {
    Obj fo(*f, "failure");
    RunFailure rf;
    fo.integer("seed", rf.seed);
    fo.integer("tick", rf.tick);
    if (const json* msg = fo.find("message")) rf.message = msg->get<std::string>();
    fo.finish();
    r.failure = rf;
  }
  o.integer("events", r.events);
  o.integer("auctions", r.auctions);
  o.integer("rides", r.rides);
  auto m = o.object("metrics");
  if (!m) field_error("metrics", "missing");
  for (MechanismType t : kAllMechanisms) {
    auto tm = m->object(to_string(t));
    if (!tm) field_error(m->at(to_string(t)), "missing");
    r.metrics[static_cast<std::size_t>(index_of(t))] = read_metrics(*tm);
  }
  auto tot = m->object("total");
  if (!tot) field_error("metrics.total", "missing");
  r.totals = read_metrics(*tot);
  m->finish();

  auto in = o.object("integrity");
  if (!in) field_error("integrity", "missing");
  if (const json* gs = in->find("collusion_groups")) {
    for (std::size_t i = 0; i < gs->size(); ++i) {
      Obj g((*gs)[i], "integrity.collusion_groups[" + std::to_string(i) + "]");
      CollusionSummary s;
      g.integer("neighborhood", s.neighborhood);
      if (const json* ds = g.find("drivers"))
        for (const auto& d : *ds) s.drivers.push_back(d.get<std::int64_t>());
      g.integer("window_start", s.window_start);
      g.integer("window_end", s.window_end);
      g.integer("customers", s.customers);
      g.finish();
      r.collusion.push_back(std::move(s));
    }
  }
  if (const json* ps = in->find("sync_logoff_pairs")) {
    for (std::size_t i = 0; i < ps->size(); ++i) {
      Obj p((*ps)[i], "integrity.sync_logoff_pairs[" + std::to_string(i) + "]");
      SyncLogoffSummary s;
      p.integer("a", s.a);
      p.integer("b", s.b);
      p.integer("occasions", s.occasions);
      p.finish();
      r.sync_logoffs.push_back(s);
    }
  }
  in->integer("gps_discrepancies", r.gps_discrepancies);
  in->integer("revenue_mismatches", r.revenue_mismatches);
  in->finish();

  auto l = o.object("ledger");
  if (!l) field_error("ledger", "missing");
  l->integer("ledgers", r.ledgers);
  l->integer("unbalanced", r.unbalanced_ledgers);
  l->money("inflow", r.inflow);
  l->money("outflow", r.outflow);
  r.by_reason = read_money_map(*l, "by_reason");
  r.inflow_by_party = read_money_map(*l, "inflow_by_party");
  r.outflow_by_party = read_money_map(*l, "outflow_by_party");
  l->finish();
  o.finish();
  return r;
}

std::string write_metrics_csv(const RunReport& r) {
  std::ostringstream os;
  os << "type";
  for_each_metric(r.totals, [&](const char* name, const auto&) { os << ',' << name; });
  os << '\n';
  auto row = [&](std::string_view label, const TypeMetrics& m) {
    os << label;
    for_each_metric(m, [&](const char*, const auto& v) { os << ',' << raw(v); });
    os << '\n';
  };
  for (MechanismType t : kAllMechanisms) row(to_string(t), r.metrics[static_cast<std::size_t>(index_of(t))]);
  row("total", r.totals);
  return os.str();
}

MetricsTable parse_metrics_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t s = 0;
    while (true) {
      auto c = line.find(',', s);
      cells.emplace_back(line.substr(s, c == std::string_view::npos ? line.npos : c - s));
      if (c == std::string_view::npos) break;
      s = c + 1;
    }
    rows.push_back(std::move(cells));
  }
  if (rows.size() != 7) fail(ErrorKind::Parse, "metrics table needs a header and 6 rows");
  std::vector<std::string> expected{"type"};
  TypeMetrics probe;
  for_each_metric(probe, [&](const char* name, const auto&) { expected.emplace_back(name); });
  if (rows[0] != expected) fail(ErrorKind::Parse, "line 1: unexpected metrics header");
  MetricsTable out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& cells = rows[i];
    const std::string where = "line " + std::to_string(i + 1);
    if (cells.size() != expected.size()) fail(ErrorKind::Parse, where + ": wrong column count");
    TypeMetrics* target = nullptr;
    if (cells[0] == "total") {
      target = &out.totals;
    } else if (auto t = parse_mechanism(cells[0])) {
      target = &out.metrics[static_cast<std::size_t>(index_of(*t))];
    } else {
      fail(ErrorKind::Parse, where + ": unknown row '" + cells[0] + "'");
    }
    std::size_t col = 1;
    for_each_metric(*target, [&](const char* name, auto& v) {
      try {
        std::size_t used = 0;
        const long long x = std::stoll(cells[col], &used);
        if (used != cells[col].size()) throw std::invalid_argument(name);
        assign(v, x);
      } catch (const std::exception&) {
        fail(ErrorKind::Parse, where + ": column '" + name + "' is not an integer");
      }
      ++col;
    });
  }
  return out;
}

// ---------------------------------------------------------------------------

double sign_test_p(std::int64_t k, std::int64_t n) {
  if (n <= 0 || k <= 0) return 1.0;
  if (k > n) return 0.0;
  const boost::math::binomial_distribution<double> b(static_cast<double>(n), 0.5);
  return boost::math::cdf(boost::math::complement(b, static_cast<double>(k - 1)));
}

namespace {

ComparePoint point_of(const TypeMetrics& m) {
  return {m.consumer_surplus, m.producer_surplus, m.deadweight_loss, m.trades};
}

CompareRow compare_one(const Scenario& base, std::uint64_t seed) {
  Scenario s = base;
  s.seed = seed;
  CompareRow row;
  row.seed = seed;
  const World world = generate_world(s);
  const RunResult mech = run(s, world, RunMode::Mechanism);
  const RunResult fixed = run(s, world, RunMode::Baseline);
  for (std::size_t t = 0; t < 5; ++t) {
    row.mechanism[t] = point_of(mech.metrics[t]);
    row.baseline[t] = point_of(fixed.metrics[t]);
    row.present[t] = mech.metrics[t].requests > 0;
  }
  if (!mech.ok() || !fixed.ok()) {
    row.ok = false;
    row.failure = !mech.ok() ? "mechanism: " + mech.failure->message
                             : "baseline: " + fixed.failure->message;
  }
  return row;
}

}  // namespace

std::array<SignTest, 5> summarize(const std::vector<CompareRow>& rows) {
  std::array<SignTest, 5> out{};
  for (std::size_t t = 0; t < 5; ++t) {
    SignTest& s = out[t];
    s.type = kAllMechanisms[t];
    long double mech = 0, fixed = 0;
    for (const auto& r : rows) {
      if (!r.ok || !r.present[t]) continue;
      ++s.seeds;
      const Money a = r.mechanism[t].deadweight_loss;
      const Money b = r.baseline[t].deadweight_loss;
      mech += static_cast<long double>(a.cents());
      fixed += static_cast<long double>(b.cents());
      if (a < b)
        ++s.mechanism_lower;
      else if (b < a)
        ++s.baseline_lower;
      else
        ++s.ties;
    }
    if (s.seeds > 0) {
      s.mean_mechanism_dwl = static_cast<double>(mech / s.seeds);
      s.mean_baseline_dwl = static_cast<double>(fixed / s.seeds);
    }
    s.p_value = sign_test_p(s.mechanism_lower, s.mechanism_lower + s.baseline_lower);
    s.direction_holds = s.seeds > 0 && mech <= fixed;
  }
  return out;
}

CompareResult compare_seeds(const Scenario& scenario, const std::vector<std::uint64_t>& seeds,
                            int threads) {
  if (seeds.empty()) fail(ErrorKind::InvalidParameter, "seed range is empty");
  scenario.validate();
  CompareResult out;
  out.rows.resize(seeds.size());
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(seeds.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++)
      out.rows[i] = compare_one(scenario, seeds[i]);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (seeds.size() > 1) out.summary = summarize(out.rows);
  return out;
}

std::string write_compare_csv(const CompareResult& r) {
  std::ostringstream os;
  os << "seed,type,status,mechanism_cs,mechanism_ps,mechanism_dwl,mechanism_trades,"
        "baseline_cs,baseline_ps,baseline_dwl,baseline_trades,dwl_difference\n";
  for (const auto& row : r.rows) {
    for (std::size_t t = 0; t < 5; ++t) {
      if (!row.present[t]) continue;
      const auto& m = row.mechanism[t];
      const auto& b = row.baseline[t];
      os << row.seed << ',' << to_string(kAllMechanisms[t]) << ',' << (row.ok ? "ok" : "aborted")
         << ',' << m.consumer_surplus.cents() << ',' << m.producer_surplus.cents() << ','
         << m.deadweight_loss.cents() << ',' << m.trades << ',' << b.consumer_surplus.cents()
         << ',' << b.producer_surplus.cents() << ',' << b.deadweight_loss.cents() << ','
         << b.trades << ',' << (m.deadweight_loss - b.deadweight_loss).cents() << '\n';
    }
  }
  return os.str();
}

std::string write_compare_summary(const CompareResult& r) {
  ordered_json j;
  j["format_version"] = kReportFormatVersion;
  j["seeds"] = r.rows.size();
  std::int64_t aborted = 0;
  for (const auto& row : r.rows) aborted += row.ok ? 0 : 1;
  j["aborted"] = aborted;
  if (!r.summary) {
    j["summary"] = nullptr;
  } else {
    ordered_json types = ordered_json::array();
    for (const SignTest& s : *r.summary) {
      if (s.seeds == 0) continue;
      types.push_back({{"type", std::string(to_string(s.type))},
                       {"seeds", s.seeds},
                       {"mean_mechanism_dwl", s.mean_mechanism_dwl},
                       {"mean_baseline_dwl", s.mean_baseline_dwl},
                       {"mechanism_lower", s.mechanism_lower},
                       {"baseline_lower", s.baseline_lower},
                       {"ties", s.ties},
                       {"sign_test_p", s.p_value},
                       {"direction_holds", s.direction_holds}});
    }
    j["summary"] = types;
  }
  return j.dump(2) + "\n";
}

}  // namespace bidride
