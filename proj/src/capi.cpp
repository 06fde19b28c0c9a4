#include "hbfq/hbfq.h"

#include "hbfq/desim.hpp"
#include "hbfq/equilibrium.hpp"
#include "hbfq/error.hpp"
#include "hbfq/reference_example.hpp"
#include "hbfq/scenario_file.hpp"
#include "hbfq/tables.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <new>
#include <sstream>
#include <string>

struct hbfq_scenario {
  hbfq::Scenario value;
};

struct hbfq_wardrop {
  hbfq::WardropReport value;
};

struct hbfq_outcome {
  hbfq_outcome_status status = HBFQ_OUTCOME_NO_EQUILIBRIUM;
  std::vector<hbfq::EquilibriumSolution> solutions;
  std::optional<double> all_hbf_regret;
};

struct hbfq_sweep {
  hbfq::SweepTable value;
};

struct hbfq_sim {
  hbfq::SimReport value;
};

struct hbfq_reference {
  hbfq::DiscrepancyReport value;
};

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

thread_local std::string g_last_error;
thread_local int g_last_error_line = 0;

hbfq_status fail(hbfq_status status, const std::string& message, int line = 0) {
  g_last_error = message;
  g_last_error_line = line;
  return status;
}

template <typename F>
hbfq_status guarded(F&& f) {
  try {
    g_last_error.clear();
    g_last_error_line = 0;
    f();
    return HBFQ_OK;
  } catch (const hbfq::ParseError& e) {
    return fail(HBFQ_ERR_PARSE, e.what(), e.line());
  } catch (const hbfq::Error& e) {
    return fail(static_cast<hbfq_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(HBFQ_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HBFQ_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HBFQ_ERR_INTERNAL, "unknown failure");
  }
}

void require(const void* p, const char* what) {
  if (!p) throw hbfq::InvalidArgument(std::string(what) + " must not be null");
}

hbfq::RoutingPolicy to_cpp(const hbfq_policy& p) {
  switch (p.form) {
    case HBFQ_POLICY_ALL_HBF: return hbfq::RoutingPolicy::all_hbf();
    case HBFQ_POLICY_ALL_FIFO: return hbfq::RoutingPolicy::all_fifo();
    case HBFQ_POLICY_SINGLE_LOW_FIFO: return hbfq::RoutingPolicy::single_low_fifo(p.beta1, p.tie);
    case HBFQ_POLICY_SINGLE_HIGH_FIFO: return hbfq::RoutingPolicy::single_high_fifo(p.beta1, p.tie);
    case HBFQ_POLICY_TWO_THRESHOLD: return hbfq::RoutingPolicy::two_threshold(p.beta1, p.beta2, p.tie);
  }
  throw hbfq::InvalidArgument("unknown policy form");
}

hbfq_policy to_c(const hbfq::RoutingPolicy& p) {
  return {static_cast<hbfq_policy_form>(p.form), p.beta1, p.beta2, p.tie};
}

hbfq::WaitVariant to_cpp(hbfq_wait_variant v) {
  if (v == HBFQ_WAIT_EQ2) return hbfq::WaitVariant::Standard;
  if (v == HBFQ_WAIT_EXAMPLE) return hbfq::WaitVariant::Example;
  throw hbfq::InvalidArgument("unknown wait variant");
}

hbfq::TwoThresholdOptions two_threshold_options(const hbfq_solver_options* o) {
  hbfq::TwoThresholdOptions t;
  if (!o) return t;
  t.grid = o->grid;
  t.max_newton_iterations = o->max_newton_iterations;
  t.verify_grid = o->verify_grid;
  t.variant = to_cpp(o->variant);
  t.tol.residual = o->residual_tol;
  t.tol.regret = o->regret_tol;
  t.tol.quadrature = o->quadrature_tol;
  return t;
}

template <typename Writer>
void write_file(const char* path, Writer&& w) {
  require(path, "path");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw hbfq::IoError(std::string("cannot open '") + path + "' for writing");
  w(os);
  os.flush();
  if (!os) throw hbfq::IoError(std::string("write to '") + path + "' failed");
}

void copy_out(const std::string& text, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (buf && cap > 0) {
    const size_t n = std::min(cap - 1, text.size());
    std::memcpy(buf, text.data(), n);
    buf[n] = '\0';
  }
}

}  // namespace

extern "C" {

const char* hbfq_version(void) { return HBFQ_VERSION; }

const char* hbfq_status_name(hbfq_status status) {
  switch (status) {
    case HBFQ_OK: return "ok";
    case HBFQ_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case HBFQ_ERR_PARSE: return "parse-error";
    case HBFQ_ERR_UNSTABLE: return "unstable";
    case HBFQ_ERR_SOLVER: return "solver-failure";
    case HBFQ_ERR_IO: return "io-error";
    case HBFQ_ERR_INTERNAL: return "internal-error";
  }
  return "unknown";
}

const char* hbfq_last_error(void) { return g_last_error.c_str(); }

int hbfq_last_error_line(void) { return g_last_error_line; }

// ---- scenario ----

hbfq_status hbfq_scenario_load(const char* path, hbfq_scenario** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new hbfq_scenario{hbfq::load_scenario(path)};
  });
}

hbfq_status hbfq_scenario_parse(const char* text, hbfq_scenario** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new hbfq_scenario{hbfq::parse_scenario(text)};
  });
}

hbfq_status hbfq_scenario_reference(hbfq_scenario** out) {
  return guarded([&] {
    require(out, "out");
    *out = new hbfq_scenario{hbfq::reference_scenario()};
  });
}

hbfq_status hbfq_scenario_clone(const hbfq_scenario* s, hbfq_scenario** out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    *out = new hbfq_scenario{s->value};
  });
}

void hbfq_scenario_free(hbfq_scenario* s) { delete s; }

hbfq_status hbfq_scenario_get(const hbfq_scenario* s, const char* key, double* value) {
  return guarded([&] {
    require(s, "scenario");
    require(key, "key");
    require(value, "value");
    const auto& v = s->value;
    const std::string k(key);
    if (k == "lambda") *value = v.lambda;
    else if (k == "mu1") *value = v.mu1;
    else if (k == "mu2") *value = v.mu2;
    else if (k == "c") *value = v.price;
    else if (k == "m") *value = v.min_bid;
    else if (k == "a") *value = v.profile.lower();
    else if (k == "b") *value = v.profile.upper();
    else if (k == "service_second_moment") *value = v.service.second_moment();
    else throw hbfq::InvalidArgument("unknown scenario key '" + k + "'");
  });
}

hbfq_status hbfq_scenario_set_price(hbfq_scenario* s, double c) {
  return guarded([&] {
    require(s, "scenario");
    hbfq::Scenario next = s->value.with_price(c);
    next.validate();
    s->value = next;
  });
}

hbfq_status hbfq_scenario_format(const hbfq_scenario* s, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    require(s, "scenario");
    copy_out(hbfq::format_scenario(s->value), buf, cap, needed);
  });
}

hbfq_status hbfq_policy_make(const char* form, double beta1, double beta2, double tie, hbfq_policy* out) {
  return guarded([&] {
    require(form, "form");
    require(out, "out");
    const auto f = hbfq::parse_policy_form(form);
    *out = {static_cast<hbfq_policy_form>(f), beta1, f == hbfq::PolicyForm::TwoThreshold ? beta2 : beta1, tie};
  });
}

const char* hbfq_policy_form_name(hbfq_policy_form form) {
  switch (form) {
    case HBFQ_POLICY_ALL_HBF: return "all-hbf";
    case HBFQ_POLICY_ALL_FIFO: return "all-fifo";
    case HBFQ_POLICY_SINGLE_LOW_FIFO: return "single-threshold-low-fifo";
    case HBFQ_POLICY_SINGLE_HIGH_FIFO: return "single-threshold-high-fifo";
    case HBFQ_POLICY_TWO_THRESHOLD: return "two-threshold";
  }
  return "unknown";
}

hbfq_status hbfq_wait_variant_parse(const char* name, hbfq_wait_variant* out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = hbfq::parse_wait_variant(name) == hbfq::WaitVariant::Standard ? HBFQ_WAIT_EQ2 : HBFQ_WAIT_EXAMPLE;
  });
}

const char* hbfq_wait_variant_name(hbfq_wait_variant v) { return v == HBFQ_WAIT_EXAMPLE ? "example" : "eq2"; }

// ---- analytic ----

hbfq_status hbfq_evaluate(const hbfq_scenario* s, const hbfq_policy* p, hbfq_wait_variant v, hbfq_loads* out) {
  return guarded([&] {
    require(s, "scenario");
    require(p, "policy");
    require(out, "out");
    hbfq::PolicyEvaluation eval(s->value, to_cpp(*p), to_cpp(v));
    const auto rev = hbfq::revenue(eval);
    *out = {eval.hbf().lambda1, eval.fifo().lambda2, eval.hbf().rho1, eval.fifo().rho2,
            eval.hbf().w0,      eval.d2(),           rev.fifo,        rev.hbf};
  });
}

hbfq_status hbfq_evaluate_at(const hbfq_scenario* s, const hbfq_policy* p, hbfq_wait_variant v, double beta,
                             hbfq_point* out) {
  return guarded([&] {
    require(s, "scenario");
    require(p, "policy");
    require(out, "out");
    hbfq::PolicyEvaluation eval(s->value, to_cpp(*p), to_cpp(v));
    *out = {hbfq::waiting_time(beta, eval.hbf()), eval.d1(beta), eval.bid(beta), eval.cost_hbf(beta),
            eval.cost_fifo(beta)};
  });
}

// ---- verify ----

hbfq_status hbfq_verify(const hbfq_scenario* s, const hbfq_policy* p, int grid, hbfq_wait_variant v, double tolerance,
                        hbfq_wardrop** out) {
  return guarded([&] {
    require(s, "scenario");
    require(p, "policy");
    require(out, "out");
    *out = new hbfq_wardrop{hbfq::verify_wardrop(s->value, to_cpp(*p), grid, to_cpp(v), tolerance)};
  });
}

hbfq_status hbfq_wardrop_summary_get(const hbfq_wardrop* w, hbfq_wardrop_summary* out) {
  return guarded([&] {
    require(w, "report");
    require(out, "out");
    const auto& r = w->value;
    *out = {r.rows.size(), r.max_regret, r.tolerance, r.satisfied() ? 1 : 0,
            r.violating_beta.value_or(kNaN), r.lambda1, r.lambda2, r.d2};
  });
}

hbfq_status hbfq_wardrop_write_csv(const hbfq_wardrop* w, const char* path) {
  return guarded([&] {
    require(w, "report");
    write_file(path, [&](std::ostream& os) { hbfq::write_wardrop_csv(os, w->value); });
  });
}

void hbfq_wardrop_free(hbfq_wardrop* w) { delete w; }

// ---- solvers ----

void hbfq_solver_options_default(hbfq_solver_options* out) {
  if (!out) return;
  const hbfq::TwoThresholdOptions t;
  const hbfq::SingleThresholdOptions st;
  *out = {t.grid,         t.max_newton_iterations, t.verify_grid,      st.scan_points,
          HBFQ_WAIT_EQ2, t.tol.residual,          t.tol.regret,       t.tol.quadrature};
}

hbfq_status hbfq_solve_two_threshold(const hbfq_scenario* s, const hbfq_solver_options* o, hbfq_outcome** out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    auto res = hbfq::solve_two_threshold(s->value, two_threshold_options(o));
    auto* h = new hbfq_outcome;
    h->status = static_cast<hbfq_outcome_status>(res.status);
    h->solutions = std::move(res.roots);
    if (res.boundary) h->solutions.push_back(std::move(*res.boundary));
    h->all_hbf_regret = res.all_hbf_max_regret;
    *out = h;
  });
}

hbfq_status hbfq_solve_single_threshold(const hbfq_scenario* s, const hbfq_solver_options* o, hbfq_outcome** out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    hbfq::SingleThresholdOptions opt;
    if (o) {
      opt.scan_points = o->scan_points;
      opt.variant = to_cpp(o->variant);
    }
    auto sol = hbfq::solve_single_threshold(s->value, opt);
    auto* h = new hbfq_outcome;
    h->status = HBFQ_OUTCOME_ROOTS;
    h->solutions.push_back(std::move(sol));
    *out = h;
  });
}

hbfq_outcome_status hbfq_outcome_status_get(const hbfq_outcome* o) {
  return o ? o->status : HBFQ_OUTCOME_NO_EQUILIBRIUM;
}

size_t hbfq_outcome_count(const hbfq_outcome* o) { return o ? o->solutions.size() : 0; }

hbfq_status hbfq_outcome_solution(const hbfq_outcome* o, size_t i, hbfq_solution_info* out) {
  return guarded([&] {
    require(o, "outcome");
    require(out, "out");
    if (i >= o->solutions.size()) throw hbfq::InvalidArgument("solution index out of range");
    const auto& sol = o->solutions[i];
    const auto rev = hbfq::revenue(sol);
    hbfq_solution_info info{};
    info.kind = static_cast<hbfq_solution_kind>(sol.kind);
    info.policy = to_c(sol.policy);
    info.lambda_hbf = sol.split.hbf.lambda1;
    info.lambda_fifo = sol.split.fifo.lambda2;
    info.d2 = sol.split.fifo.d2;
    info.bid_at_beta1 = (*sol.bids)(sol.policy.beta1);
    info.d1_at_beta1 = hbfq::sojourn_hbf(sol.policy.beta1, sol.split.hbf);
    info.max_abs_residual = sol.max_abs_residual();
    info.revenue_fifo = rev.fifo;
    info.revenue_hbf = rev.hbf;
    info.outside_interior = sol.diagnostics.outside_interior ? 1 : 0;
    info.iterations = sol.diagnostics.iterations;
    info.sign_changes = sol.diagnostics.sign_changes;
    *out = info;
  });
}

double hbfq_outcome_all_hbf_regret(const hbfq_outcome* o) {
  return o && o->all_hbf_regret ? *o->all_hbf_regret : kNaN;
}

size_t hbfq_outcome_history(const hbfq_outcome* o, size_t i, char* buf, size_t cap) {
  if (!o || o->solutions.empty()) return 0;
  const auto& h = o->solutions.front().diagnostics.history;
  if (i >= h.size()) return 0;
  size_t needed = 0;
  copy_out(h[i], buf, cap, &needed);
  return needed;
}

hbfq_status hbfq_outcome_write_csv(const hbfq_outcome* o, const char* path) {
  return guarded([&] {
    require(o, "outcome");
    write_file(path, [&](std::ostream& os) { hbfq::write_solution_csv(os, o->solutions); });
  });
}

void hbfq_outcome_free(hbfq_outcome* o) { delete o; }

const char* hbfq_solution_kind_name(hbfq_solution_kind kind) {
  const auto k = static_cast<hbfq::SolutionKind>(kind);
  switch (k) {
    case hbfq::SolutionKind::TwoThresholdInterior:
    case hbfq::SolutionKind::TwoThresholdReduced:
    case hbfq::SolutionKind::AllHbfBoundary:
    case hbfq::SolutionKind::SingleThresholdLower:
    case hbfq::SolutionKind::SingleThresholdUpper:
    case hbfq::SolutionKind::SingleThresholdInterior:
      return hbfq::to_string(k).data();
  }
  return "unknown";
}

const char* hbfq_outcome_status_name(hbfq_outcome_status status) {
  switch (status) {
    case HBFQ_OUTCOME_ROOTS:
    case HBFQ_OUTCOME_ALL_HBF:
    case HBFQ_OUTCOME_NO_EQUILIBRIUM:
      return hbfq::to_string(static_cast<hbfq::TwoThresholdStatus>(status)).data();
  }
  return "unknown";
}

// ---- refutation ----

hbfq_status hbfq_refute(const hbfq_scenario* s, hbfq_policy_form form, double beta1, hbfq_wait_variant v, int grid,
                        hbfq_refutation* out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    hbfq::RefutationCheck c;
    if (form == HBFQ_POLICY_SINGLE_LOW_FIFO)
      c = hbfq::refute_low_fifo_threshold(s->value, beta1, to_cpp(v), grid);
    else if (form == HBFQ_POLICY_SINGLE_HIGH_FIFO)
      c = hbfq::refute_high_fifo_threshold(s->value, beta1, to_cpp(v), grid);
    else
      throw hbfq::InvalidArgument("refutation applies to single-threshold forms only");
    hbfq_refutation r{};
    r.candidate = to_c(c.candidate);
    r.calibrated_price = c.calibrated_price;
    r.bid_at_threshold = c.bid_at_threshold;
    r.d1_at_threshold = c.d1_at_threshold;
    r.d2 = c.d2;
    r.refuted = c.refuted() ? 1 : 0;
    if (c.witness) {
      const auto& w = *c.witness;
      r.calibrated_basis = w.basis == hbfq::WitnessBasis::CalibratedPrice ? 1 : 0;
      r.witness_price = w.price;
      r.witness_beta = w.beta;
      r.prescribed = static_cast<hbfq_side>(w.prescribed);
      r.deviation_bid = w.deviation_bid;
      r.cost_prescribed = w.cost_prescribed;
      r.cost_deviation = w.cost_deviation;
      r.advantage = w.advantage;
    } else {
      r.witness_price = r.witness_beta = r.deviation_bid = kNaN;
      r.cost_prescribed = r.cost_deviation = r.advantage = kNaN;
    }
    *out = r;
  });
}

// ---- sweep ----

hbfq_status hbfq_sweep_price(const hbfq_scenario* s, double c_min, double c_max, int steps,
                             const hbfq_solver_options* o, unsigned threads, hbfq_sweep** out) {
  return guarded([&] {
    require(s, "scenario");
    require(out, "out");
    if (!(c_min >= 0.0) || !(c_max >= c_min)) throw hbfq::InvalidArgument("price range must satisfy 0 <= min <= max");
    const auto prices = hbfq::linear_grid(c_min, c_max, steps);
    *out = new hbfq_sweep{hbfq::sweep_admission_price(s->value, prices, two_threshold_options(o), threads)};
  });
}

size_t hbfq_sweep_count(const hbfq_sweep* w) { return w ? w->value.rows.size() : 0; }

hbfq_status hbfq_sweep_row_get(const hbfq_sweep* w, size_t i, hbfq_sweep_row* out) {
  return guarded([&] {
    require(w, "sweep");
    require(out, "out");
    if (i >= w->value.rows.size()) throw hbfq::InvalidArgument("sweep row out of range");
    const auto& r = w->value.rows[i];
    *out = {r.price,   static_cast<hbfq_outcome_status>(r.status), r.root_count, r.has_equilibrium() ? 1 : 0,
            static_cast<hbfq_policy_form>(r.form), r.beta1, r.beta2, r.lambda1, r.lambda2, r.revenue.fifo,
            r.revenue.hbf, r.residual_bid, r.residual_cost};
  });
}

long hbfq_sweep_argmax_total(const hbfq_sweep* w) {
  return w && w->value.argmax_total ? static_cast<long>(*w->value.argmax_total) : -1;
}

long hbfq_sweep_argmax_fifo(const hbfq_sweep* w) {
  return w && w->value.argmax_fifo ? static_cast<long>(*w->value.argmax_fifo) : -1;
}

hbfq_status hbfq_sweep_write_csv(const hbfq_sweep* w, const char* path) {
  return guarded([&] {
    require(w, "sweep");
    write_file(path, [&](std::ostream& os) { hbfq::write_sweep_csv(os, w->value); });
  });
}

void hbfq_sweep_free(hbfq_sweep* w) { delete w; }

// ---- simulation ----

void hbfq_sim_config_default(hbfq_sim_config* out) {
  if (!out) return;
  const hbfq::SimConfig d;
  *out = {{HBFQ_POLICY_ALL_HBF, 0.0, 0.0, 0.0}, HBFQ_WAIT_EQ2, 0, 0.0, d.horizon, d.warmup, d.seed, d.bins,
          d.batches, 1, 0, 0};
}

hbfq_status hbfq_simulate(const hbfq_scenario* s, const hbfq_sim_config* c, hbfq_sim** out) {
  return guarded([&] {
    require(s, "scenario");
    require(c, "config");
    require(out, "out");
    hbfq::SimConfig cfg;
    cfg.scenario = s->value;
    cfg.policy = to_cpp(c->policy);
    cfg.variant = to_cpp(c->variant);
    if (c->use_constant_bid) cfg.constant_bid = c->constant_bid;
    cfg.horizon = c->horizon;
    cfg.warmup = c->warmup;
    cfg.seed = c->seed;
    cfg.bins = c->bins;
    cfg.batches = c->batches;
    cfg.record_departures = c->record_departures != 0;
    if (c->replications >= 2)
      *out = new hbfq_sim{hbfq::replicate(cfg, c->replications, c->threads)};
    else
      *out = new hbfq_sim{hbfq::simulate(cfg)};
  });
}

int hbfq_sim_bins(const hbfq_sim* r) { return r ? r->value.bins : 0; }

int hbfq_sim_batches(const hbfq_sim* r) { return r ? r->value.batches : 0; }

uint64_t hbfq_sim_events(const hbfq_sim* r) { return r ? r->value.events : 0; }

hbfq_status hbfq_sim_server(const hbfq_sim* r, hbfq_side side, hbfq_server_stats* out) {
  return guarded([&] {
    require(r, "report");
    require(out, "out");
    const auto s = r->value.server_stats(static_cast<hbfq::Side>(side));
    *out = {s.arrivals,     s.throughput,
            s.utilization,  s.mean_in_system,
            s.mean_in_queue, s.mean_wait,
            s.se_wait,      hbfq::confidence_halfwidth(s.se_wait, r->value.batches),
            s.mean_sojourn, s.se_sojourn,
            s.revenue_rate, s.se_revenue_rate,
            s.little_residual, s.se_little};
  });
}

hbfq_status hbfq_sim_bin(const hbfq_sim* r, int k, hbfq_side side, hbfq_bin_stats* out) {
  return guarded([&] {
    require(r, "report");
    require(out, "out");
    const auto b = r->value.bin(k, static_cast<hbfq::Side>(side));
    *out = {b.beta_lo, b.beta_hi, b.n, b.mean_beta, b.mean_wait, b.se_wait, b.mean_sojourn, b.mean_bid, b.mean_cost};
  });
}

hbfq_status hbfq_sim_max_regret(const hbfq_sim* r, double* regret, double* se, int* significant) {
  return guarded([&] {
    require(r, "report");
    if (!r->value.regret) throw hbfq::InvalidArgument("no regret table (constant-bid run)");
    const auto& t = *r->value.regret;
    if (regret) *regret = t.max_regret();
    if (se) *se = t.argmax ? t.rows[*t.argmax].se_regret : kNaN;
    if (significant) *significant = t.significant(3.0) ? 1 : 0;
  });
}

size_t hbfq_sim_departures(const hbfq_sim* r, uint64_t* buf, size_t cap) {
  if (!r) return 0;
  const auto& d = r->value.departure_order;
  if (buf) std::copy_n(d.begin(), std::min(cap, d.size()), buf);
  return d.size();
}

hbfq_status hbfq_sim_write_csv(const hbfq_sim* r, const char* bins_path, const char* servers_path) {
  return guarded([&] {
    require(r, "report");
    write_file(bins_path, [&](std::ostream& os) { hbfq::write_bins_csv(os, r->value); });
    write_file(servers_path, [&](std::ostream& os) { hbfq::write_servers_csv(os, r->value); });
  });
}

void hbfq_sim_free(hbfq_sim* r) { delete r; }

// ---- reference example ----

hbfq_status hbfq_reference_report(long trapezoid_panels, hbfq_reference** out) {
  return guarded([&] {
    require(out, "out");
    *out = new hbfq_reference{hbfq::reference_example_report(trapezoid_panels)};
  });
}

double hbfq_reference_oracle_gap(const hbfq_reference* r) { return r ? r->value.max_oracle_gap : kNaN; }

hbfq_status hbfq_reference_write_csv(const hbfq_reference* r, const char* path) {
  return guarded([&] {
    require(r, "report");
    write_file(path, [&](std::ostream& os) { hbfq::write_discrepancy_csv(os, r->value); });
  });
}

hbfq_status hbfq_reference_text(const hbfq_reference* r, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    require(r, "report");
    std::ostringstream os;
    hbfq::write_discrepancy_text(os, r->value);
    copy_out(os.str(), buf, cap, needed);
  });
}

void hbfq_reference_free(hbfq_reference* r) { delete r; }

}  // extern "C"
