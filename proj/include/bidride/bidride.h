#ifndef BIDRIDE_BIDRIDE_H
#define BIDRIDE_BIDRIDE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BIDRIDE_API __declspec(dllexport)
#else
#define BIDRIDE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bidride_status {
  BIDRIDE_OK = 0,
  BIDRIDE_E_ARGUMENT = 1,      /* null handle or pointer, bad enum value */
  BIDRIDE_E_PARSE = 2,         /* malformed scenario, instance or report */
  BIDRIDE_E_PARAMETER = 3,     /* well-formed input violating a bound */
  BIDRIDE_E_IO = 4,
  BIDRIDE_E_REFUSED = 5,       /* verifier instance too large or degenerate */
  BIDRIDE_E_INVARIANT = 6,     /* run aborted on an invariant violation */
  BIDRIDE_E_EXISTS = 7,        /* output file present and force not set */
  BIDRIDE_E_BID = 8,           /* invalid, rejected or late bid or revision */
  BIDRIDE_E_ARITHMETIC = 9,    /* money overflow, infeasible settlement or fee */
  BIDRIDE_E_INTERNAL = 10
} bidride_status;

typedef enum bidride_mode {
  BIDRIDE_MODE_MECHANISM = 0,
  BIDRIDE_MODE_BASELINE = 1
} bidride_mode;

typedef struct bidride_scenario bidride_scenario;
typedef struct bidride_run bidride_run;
typedef struct bidride_instance bidride_instance;
typedef struct bidride_verification bidride_verification;
typedef struct bidride_comparison bidride_comparison;

BIDRIDE_API const char* bidride_version(void);
BIDRIDE_API const char* bidride_status_name(bidride_status s);

/* Message for the last failing call on this thread; empty if none. */
BIDRIDE_API const char* bidride_last_error(void);

/* Scenarios ------------------------------------------------------------- */

BIDRIDE_API bidride_status bidride_scenario_load(const char* path, bidride_scenario** out);
BIDRIDE_API bidride_status bidride_scenario_parse(const char* text, size_t len,
                                                  bidride_scenario** out);
BIDRIDE_API bidride_status bidride_scenario_default(bidride_scenario** out);
BIDRIDE_API bidride_status bidride_scenario_set_seed(bidride_scenario* s, uint64_t seed);
BIDRIDE_API bidride_status bidride_scenario_seed(const bidride_scenario* s, uint64_t* seed);
/* Canonical JSON form; the string lives as long as the handle. */
BIDRIDE_API bidride_status bidride_scenario_json(const bidride_scenario* s, const char** text,
                                                 size_t* len);
BIDRIDE_API void bidride_scenario_free(bidride_scenario* s);

/* Runs ------------------------------------------------------------------ */

/* Returns BIDRIDE_OK with a handle even when the run aborted on an invariant;
   check bidride_run_ok. */
BIDRIDE_API bidride_status bidride_simulate(const bidride_scenario* s, bidride_mode mode,
                                            bidride_run** out);
BIDRIDE_API int bidride_run_ok(const bidride_run* r);
BIDRIDE_API bidride_status bidride_run_failure(const bidride_run* r, uint64_t* seed,
                                               int64_t* tick, const char** message);
BIDRIDE_API bidride_status bidride_run_report(const bidride_run* r, const char** text,
                                              size_t* len);
BIDRIDE_API bidride_status bidride_run_metrics_csv(const bidride_run* r, const char** text,
                                                   size_t* len);
BIDRIDE_API bidride_status bidride_run_event_log(const bidride_run* r, const char** text,
                                                 size_t* len);
BIDRIDE_API bidride_status bidride_run_counts(const bidride_run* r, int64_t* events,
                                              int64_t* auctions, int64_t* rides);
BIDRIDE_API bidride_status bidride_run_privacy_violations(const bidride_run* r, size_t* count);
/* Writes report.json, metrics.csv and events.log into dir (created if
   missing). Refuses with BIDRIDE_E_EXISTS when any exists unless force. */
BIDRIDE_API bidride_status bidride_run_write(const bidride_run* r, const char* dir, int force);
BIDRIDE_API void bidride_run_free(bidride_run* r);

/* Verification ---------------------------------------------------------- */

BIDRIDE_API bidride_status bidride_instance_load(const char* path, bidride_instance** out);
BIDRIDE_API bidride_status bidride_instance_parse(const char* text, size_t len,
                                                  bidride_instance** out);
BIDRIDE_API void bidride_instance_free(bidride_instance* i);

BIDRIDE_API bidride_status bidride_verify(const bidride_instance* i, bidride_verification** out);
BIDRIDE_API bidride_status bidride_verification_json(const bidride_verification* v,
                                                     const char** text, size_t* len);
BIDRIDE_API bidride_status bidride_verification_fixed_points(const bidride_verification* v,
                                                             size_t* fixed_points,
                                                             size_t* pure_nash);
BIDRIDE_API bidride_status bidride_verification_dsic_gap(const bidride_verification* v,
                                                         int64_t* cents);
BIDRIDE_API void bidride_verification_free(bidride_verification* v);

/* Comparison against the fixed-price baseline ---------------------------- */

/* Seeds first..last inclusive; last < first is BIDRIDE_E_PARAMETER. */
BIDRIDE_API bidride_status bidride_compare(const bidride_scenario* s, uint64_t first,
                                           uint64_t last, int threads,
                                           bidride_comparison** out);
BIDRIDE_API bidride_status bidride_comparison_csv(const bidride_comparison* c, const char** text,
                                                  size_t* len);
BIDRIDE_API bidride_status bidride_comparison_summary(const bidride_comparison* c,
                                                      const char** text, size_t* len);
BIDRIDE_API bidride_status bidride_comparison_rows(const bidride_comparison* c, size_t* rows);
/* Writes compare.csv and summary.json into dir. */
BIDRIDE_API bidride_status bidride_comparison_write(const bidride_comparison* c, const char* dir,
                                                    int force);
BIDRIDE_API void bidride_comparison_free(bidride_comparison* c);

/* Payoff primitives ----------------------------------------------------- */

/* type 1..5; branch 0 = P_o1, 1 = P_o2, 2 = single. */
BIDRIDE_API bidride_status bidride_clearing_price(int type, int64_t cap, int64_t winning_bid,
                                                  int64_t base, int64_t standard,
                                                  int64_t* price, int* branch, int* feasible);

#ifdef __cplusplus
}
#endif

#endif
