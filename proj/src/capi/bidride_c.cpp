#include "bidride/bidride.h"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "payoffs/payoffs.hpp"
#include "report/report.hpp"
#include "sim/engine.hpp"
#include "sim/privacy.hpp"
#include "sim/scenario.hpp"
#include "verify/verify.hpp"

struct bidride_scenario {
  bidride::Scenario scenario;
  std::string json;
};

struct bidride_run {
  bidride::RunResult result;
  std::string report;
  std::string metrics;
  std::string events;
};

struct bidride_instance {
  bidride::SmallInstance instance;
};

struct bidride_verification {
  bidride::PropertyReport report;
  std::string json;
};

struct bidride_comparison {
  bidride::CompareResult result;
  std::string csv;
  std::string summary;
};

namespace {

thread_local std::string g_last_error;

bidride_status status_of(bidride::ErrorKind k) {
  using bidride::ErrorKind;
  switch (k) {
    case ErrorKind::InvalidParameter:
    case ErrorKind::InvalidTrack:
    case ErrorKind::IncomparableBaseline: return BIDRIDE_E_PARAMETER;
    case ErrorKind::Overflow:
    case ErrorKind::InfeasibleSettlement:
    case ErrorKind::InfeasibleFee: return BIDRIDE_E_ARITHMETIC;
    case ErrorKind::InvalidBid:
    case ErrorKind::RejectedBid:
    case ErrorKind::LateBid:
    case ErrorKind::RevisionRejected: return BIDRIDE_E_BID;
    case ErrorKind::Refused: return BIDRIDE_E_REFUSED;
    case ErrorKind::Parse: return BIDRIDE_E_PARSE;
    case ErrorKind::Invariant: return BIDRIDE_E_INVARIANT;
    case ErrorKind::Io: return BIDRIDE_E_IO;
  }
  return BIDRIDE_E_INTERNAL;
}

bidride_status set_error(bidride_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <typename F>
bidride_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const bidride::Error& e) {
    return set_error(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(BIDRIDE_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(BIDRIDE_E_INTERNAL, e.what());
  }
}

bidride_status null_arg(const char* what) {
  return set_error(BIDRIDE_E_ARGUMENT, std::string(what) + " is null");
}

bidride_status view(const std::string& s, const char** text, size_t* len) {
  if (!text) return null_arg("text");
  *text = s.c_str();
  if (len) *len = s.size();
  return BIDRIDE_OK;
}

// Writes every (name, content) pair into dir; refuses before touching
// anything if a target exists and force is off.
bidride_status write_files(const char* dir,
                           const std::vector<std::pair<std::string_view, const std::string*>>& files,
                           int force) {
  namespace fs = std::filesystem;
  if (!dir) return null_arg("dir");
  const fs::path root(dir);
  std::error_code ec;
  if (fs::exists(root, ec) && !fs::is_directory(root, ec))
    return set_error(BIDRIDE_E_IO, "output path " + root.string() + " is not a directory");
  if (!force)
    for (const auto& [name, _] : files)
      if (fs::exists(root / name, ec))
        return set_error(BIDRIDE_E_EXISTS, "output file " + (root / name).string() +
                                               " already exists (use --force to overwrite)");
  fs::create_directories(root, ec);
  if (ec) return set_error(BIDRIDE_E_IO, "cannot create " + root.string() + ": " + ec.message());
  for (const auto& [name, content] : files) {
    std::ofstream out(root / name, std::ios::binary | std::ios::trunc);
    out << *content;
    out.close();
    if (!out) return set_error(BIDRIDE_E_IO, "cannot write " + (root / name).string());
  }
  return BIDRIDE_OK;
}

bidride_scenario* wrap(bidride::Scenario s) {
  auto* h = new bidride_scenario{std::move(s), {}};
  h->json = bidride::canonical_json(h->scenario);
  return h;
}

}  // namespace

extern "C" {

const char* bidride_version(void) { return "1.0.0"; }

const char* bidride_status_name(bidride_status s) {
  switch (s) {
    case BIDRIDE_OK: return "ok";
    case BIDRIDE_E_ARGUMENT: return "argument";
    case BIDRIDE_E_PARSE: return "parse";
    case BIDRIDE_E_PARAMETER: return "parameter";
    case BIDRIDE_E_IO: return "io";
    case BIDRIDE_E_REFUSED: return "refused";
    case BIDRIDE_E_INVARIANT: return "invariant";
    case BIDRIDE_E_EXISTS: return "exists";
    case BIDRIDE_E_BID: return "bid";
    case BIDRIDE_E_ARITHMETIC: return "arithmetic";
    case BIDRIDE_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* bidride_last_error(void) { return g_last_error.c_str(); }

bidride_status bidride_scenario_load(const char* path, bidride_scenario** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = wrap(bidride::load_scenario(path));
    return BIDRIDE_OK;
  });
}

bidride_status bidride_scenario_parse(const char* text, size_t len, bidride_scenario** out) {
  if (!text) return null_arg("text");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = wrap(bidride::parse_scenario(std::string_view(text, len)));
    return BIDRIDE_OK;
  });
}

bidride_status bidride_scenario_default(bidride_scenario** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = wrap(bidride::Scenario{});
    return BIDRIDE_OK;
  });
}

bidride_status bidride_scenario_set_seed(bidride_scenario* s, uint64_t seed) {
  if (!s) return null_arg("scenario");
  return guarded([&] {
    s->scenario.seed = seed;
    s->json = bidride::canonical_json(s->scenario);
    return BIDRIDE_OK;
  });
}

bidride_status bidride_scenario_seed(const bidride_scenario* s, uint64_t* seed) {
  if (!s) return null_arg("scenario");
  if (!seed) return null_arg("seed");
  *seed = s->scenario.seed;
  return BIDRIDE_OK;
}

bidride_status bidride_scenario_json(const bidride_scenario* s, const char** text, size_t* len) {
  if (!s) return null_arg("scenario");
  return view(s->json, text, len);
}

void bidride_scenario_free(bidride_scenario* s) { delete s; }

bidride_status bidride_simulate(const bidride_scenario* s, bidride_mode mode, bidride_run** out) {
  if (!s) return null_arg("scenario");
  if (!out) return null_arg("out");
  if (mode != BIDRIDE_MODE_MECHANISM && mode != BIDRIDE_MODE_BASELINE)
    return set_error(BIDRIDE_E_ARGUMENT, "unknown run mode");
  return guarded([&] {
    auto h = std::make_unique<bidride_run>();
    h->result = bidride::run(s->scenario, mode == BIDRIDE_MODE_MECHANISM
                                              ? bidride::RunMode::Mechanism
                                              : bidride::RunMode::Baseline);
    const auto rep = bidride::make_report(h->result);
    h->report = bidride::write_report(rep);
    h->metrics = bidride::write_metrics_csv(rep);
    h->events = h->result.log.serialize();
    *out = h.release();
    return BIDRIDE_OK;
  });
}

int bidride_run_ok(const bidride_run* r) { return r && r->result.ok() ? 1 : 0; }

bidride_status bidride_run_failure(const bidride_run* r, uint64_t* seed, int64_t* tick,
                                   const char** message) {
  if (!r) return null_arg("run");
  if (!r->result.failure) return set_error(BIDRIDE_E_ARGUMENT, "run did not fail");
  if (seed) *seed = r->result.failure->seed;
  if (tick) *tick = r->result.failure->tick;
  if (message) *message = r->result.failure->message.c_str();
  return BIDRIDE_OK;
}

bidride_status bidride_run_report(const bidride_run* r, const char** text, size_t* len) {
  if (!r) return null_arg("run");
  return view(r->report, text, len);
}

bidride_status bidride_run_metrics_csv(const bidride_run* r, const char** text, size_t* len) {
  if (!r) return null_arg("run");
  return view(r->metrics, text, len);
}

bidride_status bidride_run_event_log(const bidride_run* r, const char** text, size_t* len) {
  if (!r) return null_arg("run");
  return view(r->events, text, len);
}

bidride_status bidride_run_counts(const bidride_run* r, int64_t* events, int64_t* auctions,
                                  int64_t* rides) {
  if (!r) return null_arg("run");
  if (events) *events = static_cast<int64_t>(r->result.log.size());
  if (auctions) *auctions = static_cast<int64_t>(r->result.auctions.size());
  if (rides) *rides = static_cast<int64_t>(r->result.rides.size());
  return BIDRIDE_OK;
}

bidride_status bidride_run_privacy_violations(const bidride_run* r, size_t* count) {
  if (!r) return null_arg("run");
  if (!count) return null_arg("count");
  return guarded([&] {
    *count = bidride::audit_privacy(r->result.log).size();
    return BIDRIDE_OK;
  });
}

bidride_status bidride_run_write(const bidride_run* r, const char* dir, int force) {
  if (!r) return null_arg("run");
  return guarded([&] {
    return write_files(dir,
                       {{bidride::kReportFile, &r->report},
                        {bidride::kMetricsFile, &r->metrics},
                        {bidride::kEventsFile, &r->events}},
                       force);
  });
}

void bidride_run_free(bidride_run* r) { delete r; }

bidride_status bidride_instance_load(const char* path, bidride_instance** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new bidride_instance{bidride::load_instance(path)};
    return BIDRIDE_OK;
  });
}

bidride_status bidride_instance_parse(const char* text, size_t len, bidride_instance** out) {
  if (!text) return null_arg("text");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new bidride_instance{bidride::parse_instance(std::string_view(text, len))};
    return BIDRIDE_OK;
  });
}

void bidride_instance_free(bidride_instance* i) { delete i; }

bidride_status bidride_verify(const bidride_instance* i, bidride_verification** out) {
  if (!i) return null_arg("instance");
  if (!out) return null_arg("out");
  return guarded([&] {
    auto h = std::make_unique<bidride_verification>();
    h->report = bidride::check_properties(i->instance);
    h->json = bidride::report_json(i->instance, h->report);
    *out = h.release();
    return BIDRIDE_OK;
  });
}

bidride_status bidride_verification_json(const bidride_verification* v, const char** text,
                                         size_t* len) {
  if (!v) return null_arg("verification");
  return view(v->json, text, len);
}

bidride_status bidride_verification_fixed_points(const bidride_verification* v,
                                                 size_t* fixed_points, size_t* pure_nash) {
  if (!v) return null_arg("verification");
  if (fixed_points) *fixed_points = v->report.fixed_points.size();
  if (pure_nash) *pure_nash = v->report.pure_nash.size();
  return BIDRIDE_OK;
}

bidride_status bidride_verification_dsic_gap(const bidride_verification* v, int64_t* cents) {
  if (!v) return null_arg("verification");
  if (!cents) return null_arg("cents");
  *cents = v->report.dsic_gap.cents();
  return BIDRIDE_OK;
}

void bidride_verification_free(bidride_verification* v) { delete v; }

bidride_status bidride_compare(const bidride_scenario* s, uint64_t first, uint64_t last,
                               int threads, bidride_comparison** out) {
  if (!s) return null_arg("scenario");
  if (!out) return null_arg("out");
  if (last < first) return set_error(BIDRIDE_E_PARAMETER, "seed range is empty");
  if (last - first >= 1'000'000)
    return set_error(BIDRIDE_E_PARAMETER, "seed range exceeds 1000000 seeds");
  return guarded([&] {
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t x = first;; ++x) {
      seeds.push_back(x);
      if (x == last) break;
    }
    auto h = std::make_unique<bidride_comparison>();
    h->result = bidride::compare_seeds(s->scenario, seeds, threads);
    h->csv = bidride::write_compare_csv(h->result);
    h->summary = bidride::write_compare_summary(h->result);
    *out = h.release();
    return BIDRIDE_OK;
  });
}

bidride_status bidride_comparison_csv(const bidride_comparison* c, const char** text,
                                      size_t* len) {
  if (!c) return null_arg("comparison");
  return view(c->csv, text, len);
}

bidride_status bidride_comparison_summary(const bidride_comparison* c, const char** text,
                                          size_t* len) {
  if (!c) return null_arg("comparison");
  return view(c->summary, text, len);
}

bidride_status bidride_comparison_rows(const bidride_comparison* c, size_t* rows) {
  if (!c) return null_arg("comparison");
  if (!rows) return null_arg("rows");
  *rows = c->result.rows.size();
  return BIDRIDE_OK;
}

bidride_status bidride_comparison_write(const bidride_comparison* c, const char* dir, int force) {
  if (!c) return null_arg("comparison");
  return guarded([&] {
    return write_files(dir, {{"compare.csv", &c->csv}, {"summary.json", &c->summary}}, force);
  });
}

void bidride_comparison_free(bidride_comparison* c) { delete c; }

bidride_status bidride_clearing_price(int type, int64_t cap, int64_t winning_bid, int64_t base,
                                      int64_t standard, int64_t* price, int* branch,
                                      int* feasible) {
  if (type < 1 || type > 5) return set_error(BIDRIDE_E_ARGUMENT, "type must be 1..5");
  return guarded([&] {
    using bidride::Money;
    const auto r = bidride::clearing_price(static_cast<bidride::MechanismType>(type),
                                           Money::cents(cap), Money::cents(winning_bid),
                                           Money::cents(base), Money::cents(standard));
    if (price) *price = r.price.cents();
    if (branch) *branch = static_cast<int>(r.branch);
    if (feasible) *feasible = r.feasible ? 1 : 0;
    return BIDRIDE_OK;
  });
}

}  // extern "C"
