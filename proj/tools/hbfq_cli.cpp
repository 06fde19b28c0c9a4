// hbfq: command-line front end over the C API.
//
// Exit codes: 0 ok, 1 usage, 2 scenario parse error, 3 invalid scenario or
// argument, 4 unstable routing, 5 solver failure, 6 no interior root (boundary
// outcome reported), 7 i/o error, 8 internal error.

#include "hbfq/hbfq.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kParse = 2,
  kInvalid = 3,
  kUnstable = 4,
  kSolver = 5,
  kNoRoot = 6,
  kIo = 7,
  kInternal = 8,
};

int exit_for(hbfq_status s) {
  switch (s) {
    case HBFQ_OK: return kOk;
    case HBFQ_ERR_PARSE: return kParse;
    case HBFQ_ERR_INVALID_ARGUMENT: return kInvalid;
    case HBFQ_ERR_UNSTABLE: return kUnstable;
    case HBFQ_ERR_SOLVER: return kSolver;
    case HBFQ_ERR_IO: return kIo;
    case HBFQ_ERR_INTERNAL: return kInternal;
  }
  return kInternal;
}

struct Failure {
  int code;
};

void check(hbfq_status s) {
  if (s == HBFQ_OK) return;
  std::cerr << "hbfq: " << hbfq_status_name(s) << ": " << hbfq_last_error() << '\n';
  throw Failure{exit_for(s)};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using ScenarioPtr = std::unique_ptr<hbfq_scenario, Deleter<hbfq_scenario, hbfq_scenario_free>>;
using WardropPtr = std::unique_ptr<hbfq_wardrop, Deleter<hbfq_wardrop, hbfq_wardrop_free>>;
using OutcomePtr = std::unique_ptr<hbfq_outcome, Deleter<hbfq_outcome, hbfq_outcome_free>>;
using SweepPtr = std::unique_ptr<hbfq_sweep, Deleter<hbfq_sweep, hbfq_sweep_free>>;
using SimPtr = std::unique_ptr<hbfq_sim, Deleter<hbfq_sim, hbfq_sim_free>>;
using ReferencePtr = std::unique_ptr<hbfq_reference, Deleter<hbfq_reference, hbfq_reference_free>>;

std::string fmt(double x, const char* f = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// Flags shared by every command.
struct Common {
  std::string scenario;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  std::string wait_variant = "eq2";
  std::optional<double> tol;
};

// Policy selection shared by verify and simulate.
struct PolicyArgs {
  std::string form = "two-threshold";
  double b1 = 0.0;
  double b2 = 0.0;
  double tie = 0.0;
};

struct Run {
  std::string command;
  std::vector<std::string> argv;
  Common common;
  json parameters = json::object();
  json outputs = json::array();
  json results = json::object();
  ScenarioPtr scenario;
  hbfq_wait_variant variant = HBFQ_WAIT_EQ2;

  fs::path out(const std::string& name) {
    fs::path p = fs::path(common.out_dir) / name;
    outputs.push_back(p.string());
    return p;
  }

  void load_scenario(bool required = true) {
    check(hbfq_wait_variant_parse(common.wait_variant.c_str(), &variant));
    if (common.scenario.empty()) {
      if (required) {
        std::cerr << "hbfq: --scenario is required for '" << command << "'\n";
        throw Failure{kUsage};
      }
      return;
    }
    hbfq_scenario* s = nullptr;
    const hbfq_status st = hbfq_scenario_load(common.scenario.c_str(), &s);
    if (st != HBFQ_OK) {
      std::cerr << "hbfq: " << hbfq_status_name(st) << ": " << common.scenario << ": " << hbfq_last_error() << '\n';
      throw Failure{exit_for(st)};
    }
    scenario.reset(s);
  }

  std::string scenario_text() const {
    if (!scenario) return {};
    size_t needed = 0;
    check(hbfq_scenario_format(scenario.get(), nullptr, 0, &needed));
    std::string text(needed, '\0');
    check(hbfq_scenario_format(scenario.get(), text.data(), text.size(), &needed));
    text.resize(needed - 1);
    return text;
  }
};

void prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    std::cerr << "hbfq: io-error: cannot create output directory '" << dir << "'\n";
    throw Failure{kIo};
  }
}

void write_manifest(Run& run, int exit_code, double seconds) {
  json m;
  m["tool"] = "hbfq";
  m["version"] = hbfq_version();
  m["command"] = run.command;
  m["argv"] = run.argv;
  m["scenario_path"] = run.common.scenario;
  m["scenario"] = run.scenario_text();
  m["wait_variant"] = hbfq_wait_variant_name(run.variant);
  m["seed"] = run.common.seed;
  m["parameters"] = run.parameters;
  m["results"] = run.results;
  m["outputs"] = run.outputs;
  m["csv_schema_version"] = 1;
  m["exit_code"] = exit_code;
  m["wall_clock_seconds"] = seconds;
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  m["finished_at"] = stamp;

  const fs::path path = fs::path(run.common.out_dir) / "manifest.json";
  std::ofstream os(path);
  os << m.dump(2) << '\n';
  if (!os) {
    std::cerr << "hbfq: io-error: cannot write " << path << '\n';
    throw Failure{kIo};
  }
}

hbfq_policy make_policy(const PolicyArgs& p) {
  hbfq_policy out{};
  check(hbfq_policy_make(p.form.c_str(), p.b1, p.b2, p.tie, &out));
  return out;
}

json policy_json(const hbfq_policy& p) {
  return {{"form", hbfq_policy_form_name(p.form)}, {"beta1", p.beta1}, {"beta2", p.beta2}, {"tie", p.tie}};
}

hbfq_solver_options solver_options(const Run& run) {
  hbfq_solver_options o;
  hbfq_solver_options_default(&o);
  o.variant = run.variant;
  if (run.common.tol) o.residual_tol = *run.common.tol;
  return o;
}

// ---- commands ----

struct SolveArgs {
  std::string solver = "auto";
  int grid = 200;
};

int cmd_solve(Run& run, const SolveArgs& args) {
  run.load_scenario();
  double c = 0.0, m = 0.0, mu1 = 0.0, mu2 = 0.0;
  check(hbfq_scenario_get(run.scenario.get(), "c", &c));
  check(hbfq_scenario_get(run.scenario.get(), "m", &m));
  check(hbfq_scenario_get(run.scenario.get(), "mu1", &mu1));
  check(hbfq_scenario_get(run.scenario.get(), "mu2", &mu2));

  std::string solver = args.solver;
  if (solver == "auto") solver = (c < m || (c == m && mu1 != mu2)) ? "single-threshold" : "two-threshold";
  run.parameters["solver"] = solver;
  run.parameters["grid"] = args.grid;

  auto opt = solver_options(run);
  opt.grid = args.grid;
  hbfq_outcome* raw = nullptr;
  if (solver == "two-threshold")
    check(hbfq_solve_two_threshold(run.scenario.get(), &opt, &raw));
  else if (solver == "single-threshold")
    check(hbfq_solve_single_threshold(run.scenario.get(), &opt, &raw));
  else {
    std::cerr << "hbfq: unknown solver '" << solver << "'\n";
    return kUsage;
  }
  OutcomePtr outcome(raw);
  check(hbfq_outcome_write_csv(outcome.get(), run.out("solution.csv").string().c_str()));

  const auto status = hbfq_outcome_status_get(outcome.get());
  run.results["status"] = hbfq_outcome_status_name(status);
  json roots = json::array();
  std::cout << "status: " << hbfq_outcome_status_name(status) << '\n';
  for (size_t i = 0; i < hbfq_outcome_count(outcome.get()); ++i) {
    hbfq_solution_info info;
    check(hbfq_outcome_solution(outcome.get(), i, &info));
    std::cout << "  [" << i << "] " << hbfq_solution_kind_name(info.kind) << "  beta1=" << fmt(info.policy.beta1)
              << "  beta2=" << fmt(info.policy.beta2) << "  lambda_hbf=" << fmt(info.lambda_hbf)
              << "  lambda_fifo=" << fmt(info.lambda_fifo) << "  max|residual|=" << fmt(info.max_abs_residual, "%.3e")
              << (info.outside_interior ? "  (touches support boundary)" : "") << '\n';
    roots.push_back({{"kind", hbfq_solution_kind_name(info.kind)},
                     {"policy", policy_json(info.policy)},
                     {"lambda_hbf", info.lambda_hbf},
                     {"lambda_fifo", info.lambda_fifo},
                     {"max_abs_residual", info.max_abs_residual},
                     {"revenue_fifo", info.revenue_fifo},
                     {"revenue_hbf", info.revenue_hbf},
                     {"outside_interior", info.outside_interior != 0}});
  }
  run.results["solutions"] = roots;
  const double regret = hbfq_outcome_all_hbf_regret(outcome.get());
  if (!std::isnan(regret)) {
    run.results["all_hbf_max_regret"] = regret;
    std::cout << "  all-hbf max regret: " << fmt(regret, "%.3e") << '\n';
  }
  if (status != HBFQ_OUTCOME_ROOTS) {
    std::cout << "no interior root"
              << (status == HBFQ_OUTCOME_ALL_HBF ? "; all-hbf boundary equilibrium verified" : "; no equilibrium found")
              << '\n';
    return kNoRoot;
  }
  return kOk;
}

struct VerifyArgs {
  PolicyArgs policy;
  int grid = 1000;
};

int cmd_verify(Run& run, const VerifyArgs& args) {
  run.load_scenario();
  const hbfq_policy p = make_policy(args.policy);
  const double tol = run.common.tol.value_or(1e-6);
  run.parameters["policy"] = policy_json(p);
  run.parameters["grid"] = args.grid;
  run.parameters["tolerance"] = tol;

  hbfq_wardrop* raw = nullptr;
  check(hbfq_verify(run.scenario.get(), &p, args.grid, run.variant, tol, &raw));
  WardropPtr report(raw);
  check(hbfq_wardrop_write_csv(report.get(), run.out("wardrop.csv").string().c_str()));
  hbfq_wardrop_summary sum;
  check(hbfq_wardrop_summary_get(report.get(), &sum));
  std::cout << "policy: " << hbfq_policy_form_name(p.form) << "  lambda_hbf=" << fmt(sum.lambda_hbf)
            << "  lambda_fifo=" << fmt(sum.lambda_fifo) << "  d2=" << fmt(sum.d2) << '\n'
            << "max regret: " << fmt(sum.max_regret, "%.3e") << " (tolerance " << fmt(tol, "%.1e") << ")\n";
  if (!sum.satisfied) std::cout << "violation: largest regret at beta=" << fmt(sum.violating_beta) << '\n';
  else std::cout << "wardrop conditions satisfied on the grid\n";
  run.results["max_regret"] = sum.max_regret;
  run.results["satisfied"] = sum.satisfied != 0;
  run.results["violating_beta"] = num(sum.violating_beta);

  double c = 0.0, m = 0.0;
  check(hbfq_scenario_get(run.scenario.get(), "c", &c));
  check(hbfq_scenario_get(run.scenario.get(), "m", &m));
  const bool single = p.form == HBFQ_POLICY_SINGLE_LOW_FIFO || p.form == HBFQ_POLICY_SINGLE_HIGH_FIFO;
  if (single && c > m) {
    hbfq_refutation r;
    const hbfq_status st = hbfq_refute(run.scenario.get(), p.form, p.beta1, run.variant, args.grid, &r);
    if (st == HBFQ_OK) {
      json w = {{"refuted", r.refuted != 0}, {"calibrated_price", r.calibrated_price}};
      if (r.refuted) {
        std::cout << "deviation witness (" << (r.calibrated_basis ? "calibrated price " : "scenario price ")
                  << fmt(r.witness_price) << "): beta=" << fmt(r.witness_beta) << " prescribed "
                  << (r.prescribed == HBFQ_SIDE_FIFO ? "fifo" : "hbf") << " cost " << fmt(r.cost_prescribed)
                  << ", deviation cost " << fmt(r.cost_deviation) << ", advantage " << fmt(r.advantage) << '\n';
        w["basis"] = r.calibrated_basis ? "calibrated-price" : "scenario-price";
        w["beta"] = r.witness_beta;
        w["advantage"] = r.advantage;
      } else {
        std::cout << "no deviation witness found\n";
      }
      run.results["refutation"] = w;
    } else {
      std::cout << "refutation check skipped: " << hbfq_last_error() << '\n';
    }
  }
  return kOk;
}

struct SimulateArgs {
  PolicyArgs policy;
  bool equilibrium = false;
  std::uint64_t horizon = 1'000'000;
  double warmup = 0.1;
  int bins = 50;
  int batches = 20;
  int reps = 1;
  unsigned threads = 0;
  std::optional<double> constant_bid;
};

int cmd_simulate(Run& run, const SimulateArgs& args) {
  run.load_scenario();
  hbfq_sim_config cfg;
  hbfq_sim_config_default(&cfg);
  if (args.equilibrium) {
    auto opt = solver_options(run);
    hbfq_outcome* raw = nullptr;
    check(hbfq_solve_two_threshold(run.scenario.get(), &opt, &raw));
    OutcomePtr outcome(raw);
    if (hbfq_outcome_count(outcome.get()) == 0) {
      std::cerr << "hbfq: no equilibrium to simulate\n";
      return kNoRoot;
    }
    hbfq_solution_info info;
    check(hbfq_outcome_solution(outcome.get(), 0, &info));
    cfg.policy = info.policy;
  } else {
    cfg.policy = make_policy(args.policy);
  }
  cfg.variant = run.variant;
  cfg.horizon = args.horizon;
  cfg.warmup = args.warmup;
  cfg.seed = run.common.seed;
  cfg.bins = args.bins;
  cfg.batches = args.batches;
  cfg.replications = args.reps;
  cfg.threads = args.threads;
  if (args.constant_bid) {
    cfg.use_constant_bid = 1;
    cfg.constant_bid = *args.constant_bid;
  }
  run.parameters["policy"] = policy_json(cfg.policy);
  run.parameters["horizon"] = args.horizon;
  run.parameters["warmup"] = args.warmup;
  run.parameters["bins"] = args.bins;
  run.parameters["batches"] = args.batches;
  run.parameters["replications"] = args.reps;
  if (args.constant_bid) run.parameters["constant_bid"] = *args.constant_bid;

  hbfq_sim* raw = nullptr;
  check(hbfq_simulate(run.scenario.get(), &cfg, &raw));
  SimPtr sim(raw);
  check(hbfq_sim_write_csv(sim.get(), run.out("sim_bins.csv").string().c_str(),
                           run.out("sim_servers.csv").string().c_str()));
  json servers = json::object();
  for (hbfq_side side : {HBFQ_SIDE_HBF, HBFQ_SIDE_FIFO}) {
    hbfq_server_stats s;
    check(hbfq_sim_server(sim.get(), side, &s));
    const char* name = side == HBFQ_SIDE_HBF ? "hbf" : "fifo";
    std::cout << name << ": arrivals=" << fmt(s.arrivals, "%.0f") << "  utilization=" << fmt(s.utilization, "%.4f")
              << "  mean_wait=" << fmt(s.mean_wait, "%.5f") << " +/- " << fmt(s.ci_wait, "%.5f")
              << "  revenue_rate=" << fmt(s.revenue_rate, "%.5f") << '\n';
    servers[name] = {{"arrivals", s.arrivals},         {"utilization", num(s.utilization)},
                     {"mean_wait", num(s.mean_wait)},  {"se_wait", num(s.se_wait)},
                     {"revenue_rate", num(s.revenue_rate)}};
  }
  run.results["servers"] = servers;
  run.results["batches"] = hbfq_sim_batches(sim.get());
  double regret = 0.0, se = 0.0;
  int significant = 0;
  if (hbfq_sim_max_regret(sim.get(), &regret, &se, &significant) == HBFQ_OK) {
    std::cout << "max empirical regret: " << fmt(regret, "%.5f") << " (se " << fmt(se, "%.5f") << ")"
              << (significant ? "  significant at 3 se" : "") << '\n';
    run.results["max_regret"] = num(regret);
    run.results["max_regret_se"] = num(se);
    run.results["regret_significant"] = significant != 0;
  }
  return kOk;
}

struct SweepArgs {
  double c_min = 0.0;
  double c_max = 2.0;
  int steps = 41;
  unsigned threads = 0;
};

int cmd_sweep(Run& run, const SweepArgs& args) {
  run.load_scenario();
  run.parameters["c_min"] = args.c_min;
  run.parameters["c_max"] = args.c_max;
  run.parameters["steps"] = args.steps;
  const auto opt = solver_options(run);
  hbfq_sweep* raw = nullptr;
  check(hbfq_sweep_price(run.scenario.get(), args.c_min, args.c_max, args.steps, &opt, args.threads, &raw));
  SweepPtr sweep(raw);
  check(hbfq_sweep_write_csv(sweep.get(), run.out("sweep.csv").string().c_str()));
  const long best = hbfq_sweep_argmax_total(sweep.get());
  const long best_fifo = hbfq_sweep_argmax_fifo(sweep.get());
  size_t with_eq = 0;
  for (size_t i = 0; i < hbfq_sweep_count(sweep.get()); ++i) {
    hbfq_sweep_row r;
    check(hbfq_sweep_row_get(sweep.get(), i, &r));
    with_eq += r.has_equilibrium ? 1 : 0;
  }
  std::cout << "prices: " << hbfq_sweep_count(sweep.get()) << ", with equilibrium: " << with_eq << '\n';
  auto report = [&](const char* label, long idx, const char* key) {
    if (idx < 0) {
      std::cout << label << ": none\n";
      return;
    }
    hbfq_sweep_row r;
    check(hbfq_sweep_row_get(sweep.get(), static_cast<size_t>(idx), &r));
    std::cout << label << ": c=" << fmt(r.price) << "  total=" << fmt(r.revenue_fifo + r.revenue_hbf)
              << "  fifo=" << fmt(r.revenue_fifo) << "  hbf=" << fmt(r.revenue_hbf) << '\n';
    run.results[key] = {{"price", r.price},
                        {"revenue_total", r.revenue_fifo + r.revenue_hbf},
                        {"revenue_fifo", r.revenue_fifo},
                        {"revenue_hbf", r.revenue_hbf}};
  };
  report("max total revenue", best, "argmax_total");
  report("max fifo revenue", best_fifo, "argmax_fifo");
  return kOk;
}

struct ReferenceArgs {
  long panels = 1'000'000;
};

int cmd_reference(Run& run, const ReferenceArgs& args) {
  run.load_scenario(false);
  run.parameters["trapezoid_panels"] = args.panels;
  hbfq_reference* raw = nullptr;
  check(hbfq_reference_report(args.panels, &raw));
  ReferencePtr report(raw);
  check(hbfq_reference_write_csv(report.get(), run.out("discrepancy.csv").string().c_str()));
  size_t needed = 0;
  check(hbfq_reference_text(report.get(), nullptr, 0, &needed));
  std::string text(needed, '\0');
  check(hbfq_reference_text(report.get(), text.data(), text.size(), &needed));
  text.resize(needed - 1);
  std::cout << text;
  const fs::path txt = run.out("discrepancy.txt");
  std::ofstream(txt) << text;
  run.results["oracle_gap"] = hbfq_reference_oracle_gap(report.get());
  if (!run.scenario) {
    hbfq_scenario* s = nullptr;
    check(hbfq_scenario_reference(&s));
    run.scenario.reset(s);
  }
  return kOk;
}

int dispatch(const std::vector<std::string>& argv);

int cmd_replay(const std::string& manifest_path, const std::optional<std::string>& out_dir) {
  std::ifstream is(manifest_path);
  if (!is) {
    std::cerr << "hbfq: io-error: cannot read manifest '" << manifest_path << "'\n";
    return kIo;
  }
  json m;
  try {
    is >> m;
  } catch (const std::exception& e) {
    std::cerr << "hbfq: parse-error: manifest: " << e.what() << '\n';
    return kParse;
  }
  if (!m.contains("argv") || !m["argv"].is_array()) {
    std::cerr << "hbfq: parse-error: manifest has no argv\n";
    return kParse;
  }
  std::vector<std::string> argv = m["argv"].get<std::vector<std::string>>();
  if (out_dir) {
    bool replaced = false;
    for (size_t i = 0; i + 1 < argv.size(); ++i) {
      if (argv[i] == "--out-dir") {
        argv[i + 1] = *out_dir;
        replaced = true;
      }
    }
    if (!replaced) {
      argv.push_back("--out-dir");
      argv.push_back(*out_dir);
    }
  }
  return dispatch(argv);
}

void add_common(CLI::App* sub, Common& c, bool scenario_required) {
  auto* opt = sub->add_option("--scenario", c.scenario, "Scenario file (TOML subset)");
  if (scenario_required) opt->required();
  sub->add_option("--out-dir", c.out_dir, "Directory for CSV outputs and manifest.json");
  sub->add_option("--seed", c.seed, "Base random seed");
  sub->add_option("--wait-variant", c.wait_variant, "HBF waiting-time numerator: eq2 or example")
      ->check(CLI::IsMember({"eq2", "standard", "example"}));
  sub->add_option("--tol", c.tol, "Solver residual tolerance (verify: regret tolerance)");
}

void add_policy(CLI::App* sub, PolicyArgs& p) {
  sub->add_option("--policy", p.form,
                  "all-hbf | all-fifo | single-low | single-high | two-threshold");
  sub->add_option("--b1", p.b1, "Lower threshold");
  sub->add_option("--b2", p.b2, "Upper threshold (two-threshold)");
  sub->add_option("--tie", p.tie, "FIFO probability at the thresholds");
}

int dispatch(const std::vector<std::string>& argv) {
  CLI::App app{"Wardrop routing between an HBF auction queue and a priced FIFO queue"};
  app.set_version_flag("--version", std::string(hbfq_version()));
  app.require_subcommand(1);

  Common common;
  SolveArgs solve;
  VerifyArgs verify;
  SimulateArgs simulate;
  SweepArgs sweep;
  ReferenceArgs reference;
  std::string manifest;
  std::optional<std::string> replay_out;

  auto* s_solve = app.add_subcommand("solve", "Solve for the equilibrium thresholds");
  add_common(s_solve, common, true);
  s_solve->add_option("--solver", solve.solver, "auto | two-threshold | single-threshold")
      ->check(CLI::IsMember({"auto", "two-threshold", "single-threshold"}));
  s_solve->add_option("--grid", solve.grid, "Two-threshold scan resolution per axis");

  auto* s_verify = app.add_subcommand("verify", "Check the Wardrop conditions for a policy");
  add_common(s_verify, common, true);
  add_policy(s_verify, verify.policy);
  s_verify->add_option("--grid", verify.grid, "Number of types checked");

  auto* s_sim = app.add_subcommand("simulate", "Discrete-event simulation of both servers");
  add_common(s_sim, common, true);
  add_policy(s_sim, simulate.policy);
  s_sim->add_flag("--equilibrium", simulate.equilibrium, "Simulate the solved two-threshold equilibrium");
  s_sim->add_option("--horizon", simulate.horizon, "Arrivals per replication");
  s_sim->add_option("--warmup", simulate.warmup, "Discarded fraction of the horizon");
  s_sim->add_option("--bins", simulate.bins, "Equal-probability type bins");
  s_sim->add_option("--batches", simulate.batches, "Batch-means groups");
  s_sim->add_option("--reps", simulate.reps, "Independent replications (>= 2 pools them)");
  s_sim->add_option("--threads", simulate.threads, "Worker threads for replications (0: hardware)");
  s_sim->add_option("--constant-bid", simulate.constant_bid, "Every HBF joiner bids this amount");

  auto* s_sweep = app.add_subcommand("sweep", "Sweep the FIFO admission price");
  add_common(s_sweep, common, true);
  s_sweep->add_option("--c-min", sweep.c_min, "Lowest price");
  s_sweep->add_option("--c-max", sweep.c_max, "Highest price");
  s_sweep->add_option("--steps", sweep.steps, "Number of prices")->check(CLI::PositiveNumber);
  s_sweep->add_option("--threads", sweep.threads, "Worker threads (0: hardware)");

  auto* s_ref = app.add_subcommand("paper-example", "Recompute the published worked example");
  s_ref->alias("reference-example");
  add_common(s_ref, common, false);
  s_ref->add_option("--panels", reference.panels, "Trapezoid oracle panels");

  auto* s_replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  s_replay->add_option("manifest", manifest, "manifest.json")->required();
  s_replay->add_option("--out-dir", replay_out, "Override the recorded output directory");

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (s_replay->parsed()) return cmd_replay(manifest, replay_out);

  Run run;
  run.argv = argv;
  run.common = common;
  const auto start = std::chrono::steady_clock::now();
  int rc = kOk;
  try {
    prepare_out_dir(common.out_dir);
    if (s_solve->parsed()) {
      run.command = "solve";
      rc = cmd_solve(run, solve);
    } else if (s_verify->parsed()) {
      run.command = "verify";
      rc = cmd_verify(run, verify);
    } else if (s_sim->parsed()) {
      run.command = "simulate";
      rc = cmd_simulate(run, simulate);
    } else if (s_sweep->parsed()) {
      run.command = "sweep";
      rc = cmd_sweep(run, sweep);
    } else if (s_ref->parsed()) {
      run.command = "paper-example";
      rc = cmd_reference(run, reference);
    }
  } catch (const Failure& f) {
    rc = f.code;
  }
  if (rc == kUsage || rc == kIo) return rc;
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    write_manifest(run, rc, seconds);
  } catch (const Failure& f) {
    return f.code;
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(args);
  } catch (const std::exception& e) {
    std::cerr << "hbfq: internal-error: " << e.what() << '\n';
    return kInternal;
  }
}
