/* C interface to the hbfq library.
 *
 * All objects are opaque handles released with the matching *_free function.
 * Functions return HBFQ_OK or an error status; the message of the most recent
 * failure on the calling thread is available from hbfq_last_error(). Output
 * parameters are left untouched on failure.
 */
#ifndef HBFQ_H
#define HBFQ_H

#include <stddef.h>
#include <stdint.h>

#if defined(HBFQ_BUILDING_LIBRARY)
#define HBFQ_API __attribute__((visibility("default")))
#else
#define HBFQ_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hbfq_status {
  HBFQ_OK = 0,
  HBFQ_ERR_INVALID_ARGUMENT = 1,
  HBFQ_ERR_PARSE = 2,
  HBFQ_ERR_UNSTABLE = 3,
  HBFQ_ERR_SOLVER = 4,
  HBFQ_ERR_IO = 5,
  HBFQ_ERR_INTERNAL = 6
} hbfq_status;

typedef enum hbfq_wait_variant { HBFQ_WAIT_EQ2 = 0, HBFQ_WAIT_EXAMPLE = 1 } hbfq_wait_variant;

typedef enum hbfq_policy_form {
  HBFQ_POLICY_ALL_HBF = 0,
  HBFQ_POLICY_ALL_FIFO = 1,
  HBFQ_POLICY_SINGLE_LOW_FIFO = 2,
  HBFQ_POLICY_SINGLE_HIGH_FIFO = 3,
  HBFQ_POLICY_TWO_THRESHOLD = 4
} hbfq_policy_form;

typedef enum hbfq_side { HBFQ_SIDE_HBF = 0, HBFQ_SIDE_FIFO = 1 } hbfq_side;

typedef struct hbfq_policy {
  hbfq_policy_form form;
  double beta1;
  double beta2;
  double tie; /* FIFO probability at the thresholds */
} hbfq_policy;

typedef struct hbfq_scenario hbfq_scenario;
typedef struct hbfq_wardrop hbfq_wardrop;
typedef struct hbfq_outcome hbfq_outcome;
typedef struct hbfq_sweep hbfq_sweep;
typedef struct hbfq_sim hbfq_sim;
typedef struct hbfq_reference hbfq_reference;

HBFQ_API const char* hbfq_version(void);
HBFQ_API const char* hbfq_status_name(hbfq_status status);
/* Message of the last failure on this thread; "" if none. */
HBFQ_API const char* hbfq_last_error(void);
/* Scenario-file line of the last parse failure; 0 if not line-specific. */
HBFQ_API int hbfq_last_error_line(void);

/* ---- scenario ---- */

HBFQ_API hbfq_status hbfq_scenario_load(const char* path, hbfq_scenario** out);
HBFQ_API hbfq_status hbfq_scenario_parse(const char* text, hbfq_scenario** out);
/* The published worked example (lambda 4, mu 5, uniform [0,10], c 0.2017). */
HBFQ_API hbfq_status hbfq_scenario_reference(hbfq_scenario** out);
HBFQ_API hbfq_status hbfq_scenario_clone(const hbfq_scenario* s, hbfq_scenario** out);
HBFQ_API void hbfq_scenario_free(hbfq_scenario* s);
/* Keys: lambda, mu1, mu2, c, m, a, b, service_second_moment. */
HBFQ_API hbfq_status hbfq_scenario_get(const hbfq_scenario* s, const char* key, double* value);
HBFQ_API hbfq_status hbfq_scenario_set_price(hbfq_scenario* s, double c);
/* Canonical scenario text. Writes at most cap bytes including the terminator;
 * *needed receives the full length plus one. */
HBFQ_API hbfq_status hbfq_scenario_format(const hbfq_scenario* s, char* buf, size_t cap, size_t* needed);

/* Accepts all-hbf, all-fifo, single-low / single-threshold-low-fifo,
 * single-high / single-threshold-high-fifo, two-threshold. */
HBFQ_API hbfq_status hbfq_policy_make(const char* form, double beta1, double beta2, double tie, hbfq_policy* out);
HBFQ_API const char* hbfq_policy_form_name(hbfq_policy_form form);
HBFQ_API hbfq_status hbfq_wait_variant_parse(const char* name, hbfq_wait_variant* out);
HBFQ_API const char* hbfq_wait_variant_name(hbfq_wait_variant v);

/* ---- analytic quantities under a fixed policy ---- */

typedef struct hbfq_loads {
  double lambda_hbf;
  double lambda_fifo;
  double rho_hbf;
  double rho_fifo;
  double w0;
  double d2;
  double revenue_fifo;
  double revenue_hbf;
} hbfq_loads;

HBFQ_API hbfq_status hbfq_evaluate(const hbfq_scenario* s, const hbfq_policy* p, hbfq_wait_variant v,
                                   hbfq_loads* out);

typedef struct hbfq_point {
  double wait;    /* W(beta) */
  double sojourn; /* D1(beta) */
  double bid;     /* X(beta) */
  double cost_hbf;
  double cost_fifo;
} hbfq_point;

HBFQ_API hbfq_status hbfq_evaluate_at(const hbfq_scenario* s, const hbfq_policy* p, hbfq_wait_variant v,
                                      double beta, hbfq_point* out);

/* ---- Wardrop verification ---- */

typedef struct hbfq_wardrop_summary {
  size_t rows;
  double max_regret;
  double tolerance;
  int satisfied;
  double violating_beta; /* NaN when satisfied */
  double lambda_hbf;
  double lambda_fifo;
  double d2;
} hbfq_wardrop_summary;

HBFQ_API hbfq_status hbfq_verify(const hbfq_scenario* s, const hbfq_policy* p, int grid, hbfq_wait_variant v,
                                 double tolerance, hbfq_wardrop** out);
HBFQ_API hbfq_status hbfq_wardrop_summary_get(const hbfq_wardrop* w, hbfq_wardrop_summary* out);
HBFQ_API hbfq_status hbfq_wardrop_write_csv(const hbfq_wardrop* w, const char* path);
HBFQ_API void hbfq_wardrop_free(hbfq_wardrop* w);

/* ---- equilibrium solvers ---- */

typedef struct hbfq_solver_options {
  int grid;                  /* two-threshold scan resolution per axis */
  int max_newton_iterations;
  int verify_grid;
  int scan_points;           /* single-threshold residual scan */
  hbfq_wait_variant variant;
  double residual_tol;
  double regret_tol;
  double quadrature_tol;
} hbfq_solver_options;

HBFQ_API void hbfq_solver_options_default(hbfq_solver_options* out);

typedef enum hbfq_outcome_status {
  HBFQ_OUTCOME_ROOTS = 0,
  HBFQ_OUTCOME_ALL_HBF = 1,       /* no interior root; all-HBF verified */
  HBFQ_OUTCOME_NO_EQUILIBRIUM = 2
} hbfq_outcome_status;

typedef enum hbfq_solution_kind {
  HBFQ_KIND_TWO_THRESHOLD = 0,
  HBFQ_KIND_TWO_THRESHOLD_REDUCED = 1,
  HBFQ_KIND_ALL_HBF_BOUNDARY = 2,
  HBFQ_KIND_SINGLE_LOWER = 3,
  HBFQ_KIND_SINGLE_UPPER = 4,
  HBFQ_KIND_SINGLE_INTERIOR = 5
} hbfq_solution_kind;

typedef struct hbfq_solution_info {
  hbfq_solution_kind kind;
  hbfq_policy policy;
  double lambda_hbf;
  double lambda_fifo;
  double d2;
  double bid_at_beta1;
  double d1_at_beta1;
  double max_abs_residual;
  double revenue_fifo;
  double revenue_hbf;
  int outside_interior;
  int iterations;
  int sign_changes;
} hbfq_solution_info;

HBFQ_API hbfq_status hbfq_solve_two_threshold(const hbfq_scenario* s, const hbfq_solver_options* o,
                                              hbfq_outcome** out);
HBFQ_API hbfq_status hbfq_solve_single_threshold(const hbfq_scenario* s, const hbfq_solver_options* o,
                                                 hbfq_outcome** out);
HBFQ_API hbfq_outcome_status hbfq_outcome_status_get(const hbfq_outcome* o);
/* Roots, or the single boundary solution. */
HBFQ_API size_t hbfq_outcome_count(const hbfq_outcome* o);
HBFQ_API hbfq_status hbfq_outcome_solution(const hbfq_outcome* o, size_t i, hbfq_solution_info* out);
/* NaN unless the all-HBF fallback was checked. */
HBFQ_API double hbfq_outcome_all_hbf_regret(const hbfq_outcome* o);
HBFQ_API size_t hbfq_outcome_history(const hbfq_outcome* o, size_t i, char* buf, size_t cap);
HBFQ_API hbfq_status hbfq_outcome_write_csv(const hbfq_outcome* o, const char* path);
HBFQ_API void hbfq_outcome_free(hbfq_outcome* o);
HBFQ_API const char* hbfq_solution_kind_name(hbfq_solution_kind kind);
HBFQ_API const char* hbfq_outcome_status_name(hbfq_outcome_status status);

/* ---- single-threshold refutation (c > m) ---- */

typedef struct hbfq_refutation {
  hbfq_policy candidate;
  double calibrated_price;
  double bid_at_threshold;
  double d1_at_threshold;
  double d2;
  int refuted;
  int calibrated_basis; /* 1: at the calibrated price, 0: at the scenario price */
  double witness_price;
  double witness_beta;
  hbfq_side prescribed;
  double deviation_bid;
  double cost_prescribed;
  double cost_deviation;
  double advantage;
} hbfq_refutation;

/* form is HBFQ_POLICY_SINGLE_LOW_FIFO or HBFQ_POLICY_SINGLE_HIGH_FIFO. */
HBFQ_API hbfq_status hbfq_refute(const hbfq_scenario* s, hbfq_policy_form form, double beta1, hbfq_wait_variant v,
                                 int grid, hbfq_refutation* out);

/* ---- admission-price sweep ---- */

typedef struct hbfq_sweep_row {
  double price;
  hbfq_outcome_status status;
  size_t root_count;
  int has_equilibrium;
  hbfq_policy_form form;
  double beta1;
  double beta2;
  double lambda_hbf;
  double lambda_fifo;
  double revenue_fifo;
  double revenue_hbf;
  double residual_bid;
  double residual_cost;
} hbfq_sweep_row;

HBFQ_API hbfq_status hbfq_sweep_price(const hbfq_scenario* s, double c_min, double c_max, int steps,
                                      const hbfq_solver_options* o, unsigned threads, hbfq_sweep** out);
HBFQ_API size_t hbfq_sweep_count(const hbfq_sweep* w);
HBFQ_API hbfq_status hbfq_sweep_row_get(const hbfq_sweep* w, size_t i, hbfq_sweep_row* out);
/* Row index, or -1 when no row has an equilibrium. */
HBFQ_API long hbfq_sweep_argmax_total(const hbfq_sweep* w);
HBFQ_API long hbfq_sweep_argmax_fifo(const hbfq_sweep* w);
HBFQ_API hbfq_status hbfq_sweep_write_csv(const hbfq_sweep* w, const char* path);
HBFQ_API void hbfq_sweep_free(hbfq_sweep* w);

/* ---- discrete-event simulation ---- */

typedef struct hbfq_sim_config {
  hbfq_policy policy;
  hbfq_wait_variant variant;
  int use_constant_bid;
  double constant_bid;
  uint64_t horizon;
  double warmup;
  uint64_t seed;
  int bins;
  int batches;
  int replications; /* >= 2 pools independent replications, one batch each */
  unsigned threads;
  int record_departures;
} hbfq_sim_config;

typedef struct hbfq_server_stats {
  double arrivals;
  double throughput;
  double utilization;
  double mean_in_system;
  double mean_in_queue;
  double mean_wait;
  double se_wait;
  double ci_wait;
  double mean_sojourn;
  double se_sojourn;
  double revenue_rate;
  double se_revenue_rate;
  double little_residual;
  double se_little;
} hbfq_server_stats;

typedef struct hbfq_bin_stats {
  double beta_lo;
  double beta_hi;
  double n;
  double mean_beta;
  double mean_wait;
  double se_wait;
  double mean_sojourn;
  double mean_bid;
  double mean_cost;
} hbfq_bin_stats;

HBFQ_API void hbfq_sim_config_default(hbfq_sim_config* out);
HBFQ_API hbfq_status hbfq_simulate(const hbfq_scenario* s, const hbfq_sim_config* c, hbfq_sim** out);
HBFQ_API int hbfq_sim_bins(const hbfq_sim* r);
HBFQ_API int hbfq_sim_batches(const hbfq_sim* r);
HBFQ_API uint64_t hbfq_sim_events(const hbfq_sim* r);
HBFQ_API hbfq_status hbfq_sim_server(const hbfq_sim* r, hbfq_side side, hbfq_server_stats* out);
HBFQ_API hbfq_status hbfq_sim_bin(const hbfq_sim* r, int k, hbfq_side side, hbfq_bin_stats* out);
/* Largest per-bin empirical regret, its standard error, and whether any bin is
 * more than 3 standard errors above zero. Fails if no regret was computed. */
HBFQ_API hbfq_status hbfq_sim_max_regret(const hbfq_sim* r, double* regret, double* se, int* significant);
/* Copies up to cap departure ids; returns the total count. */
HBFQ_API size_t hbfq_sim_departures(const hbfq_sim* r, uint64_t* buf, size_t cap);
HBFQ_API hbfq_status hbfq_sim_write_csv(const hbfq_sim* r, const char* bins_path, const char* servers_path);
HBFQ_API void hbfq_sim_free(hbfq_sim* r);

/* ---- published worked example ---- */

HBFQ_API hbfq_status hbfq_reference_report(long trapezoid_panels, hbfq_reference** out);
HBFQ_API double hbfq_reference_oracle_gap(const hbfq_reference* r);
HBFQ_API hbfq_status hbfq_reference_write_csv(const hbfq_reference* r, const char* path);
HBFQ_API hbfq_status hbfq_reference_text(const hbfq_reference* r, char* buf, size_t cap, size_t* needed);
HBFQ_API void hbfq_reference_free(hbfq_reference* r);

#ifdef __cplusplus
}
#endif

#endif /* HBFQ_H */
