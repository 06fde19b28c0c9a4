#include "hbfq/equilibrium.hpp"

#include "hbfq/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace hbfq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

bool stable_split(const Scenario& s, double fifo_mass) {
  const double lambda2 = s.lambda * fifo_mass;
  const double lambda1 = s.lambda - lambda2;
  return lambda1 < s.mu1 && lambda2 < s.mu2;
}

}  // namespace

PolicyEvaluation::PolicyEvaluation(const Scenario& scenario, const RoutingPolicy& policy, WaitVariant variant,
                                   int bid_cells)
    : scenario_(scenario), policy_(policy) {
  scenario_.validate();
  split_ = build_profiles(scenario_, policy_, variant);
  bids_ = std::make_shared<const BidCurve>(split_.hbf, bid_cells);
}

std::vector<BidLevel> attainable_levels(const PolicyEvaluation& eval, std::span<const double> types) {
  const auto& prof = eval.scenario().profile;
  std::vector<double> all(types.begin(), types.end());
  all.push_back(prof.lower());
  all.push_back(prof.upper());
  const auto& pol = eval.policy();
  if (pol.form != PolicyForm::AllHbf && pol.form != PolicyForm::AllFifo) {
    all.push_back(pol.beta1);
    if (pol.form == PolicyForm::TwoThreshold) all.push_back(pol.beta2);
  }
  std::vector<BidLevel> out;
  out.reserve(all.size());
  for (double y : all) out.push_back({y, eval.payment(y), eval.d1(y)});
  return out;
}

BidLevel best_level(double beta, std::span<const BidLevel> levels) {
  BidLevel best{};
  double best_cost = kInf;
  for (const auto& lv : levels) {
    const double cost = lv.payment + beta * lv.sojourn;
    if (cost < best_cost) {
      best_cost = cost;
      best = lv;
    }
  }
  return best;
}

WardropReport verify_wardrop(const Scenario& scenario, const RoutingPolicy& policy, int grid_size,
                             WaitVariant variant, double tolerance) {
  return verify_wardrop(PolicyEvaluation(scenario, policy, variant), grid_size, tolerance);
}

WardropReport verify_wardrop(const PolicyEvaluation& eval, int grid_size, double tolerance) {
  if (grid_size < 2) throw InvalidArgument("verification grid needs at least 2 points");
  const auto& prof = eval.scenario().profile;
  const double a = prof.lower();
  const double b = prof.upper();

  std::vector<double> grid(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i) grid[i] = a + (b - a) * i / (grid_size - 1);
  const auto levels = attainable_levels(eval, grid);

  WardropReport report;
  report.policy = eval.policy();
  report.variant = eval.variant();
  report.lambda1 = eval.hbf().lambda1;
  report.lambda2 = eval.fifo().lambda2;
  report.d2 = eval.d2();
  report.tolerance = tolerance;
  report.rows.reserve(grid.size());

  double worst_beta = a;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double beta = grid[i];
    WardropRow row;
    row.beta = beta;
    row.fifo_probability = eval.policy().fifo_probability(beta, prof);
    row.cost_fifo = eval.cost_fifo(beta);
    // The grid point's own level is levels[i]; reuse it so own and best agree exactly.
    row.cost_hbf = levels[i].payment + beta * levels[i].sojourn;
    const BidLevel best = best_level(beta, levels);
    row.cost_hbf_best = std::min(row.cost_hbf, best.payment + beta * best.sojourn);
    row.best_level_type = best.type;

    if (row.fifo_probability >= 1.0) {
      row.assigned = Side::Fifo;
      row.regret = row.cost_fifo - std::min(row.cost_fifo, row.cost_hbf_best);
    } else if (row.fifo_probability <= 0.0) {
      row.assigned = Side::Hbf;
      row.regret = row.cost_hbf - std::min(row.cost_fifo, row.cost_hbf_best);
    } else {
      row.regret = std::abs(row.cost_fifo - row.cost_hbf_best);
    }
    if (row.regret > report.max_regret) {
      report.max_regret = row.regret;
      worst_beta = beta;
    }
    report.rows.push_back(row);
  }
  if (report.max_regret > tolerance) report.violating_beta = worst_beta;
  return report;
}

std::string_view to_string(SolutionKind kind) {
  switch (kind) {
    case SolutionKind::TwoThresholdInterior: return "two-threshold";
    case SolutionKind::TwoThresholdReduced: return "two-threshold-reduced";
    case SolutionKind::AllHbfBoundary: return "all-hbf-boundary";
    case SolutionKind::SingleThresholdLower: return "single-threshold-lower";
    case SolutionKind::SingleThresholdUpper: return "single-threshold-upper";
    case SolutionKind::SingleThresholdInterior: return "single-threshold-interior";
  }
  return "?";
}

std::string_view to_string(TwoThresholdStatus status) {
  switch (status) {
    case TwoThresholdStatus::Roots: return "roots";
    case TwoThresholdStatus::AllHbf: return "all-hbf";
    case TwoThresholdStatus::NoEquilibrium: return "no-root";
  }
  return "?";
}

std::string_view to_string(WitnessBasis basis) {
  return basis == WitnessBasis::CalibratedPrice ? "calibrated-price" : "scenario-price";
}

double EquilibriumSolution::residual(std::string_view name) const {
  for (const auto& r : residuals)
    if (r.name == name) return r.value;
  throw InvalidArgument("no residual named '" + std::string(name) + "'");
}

double EquilibriumSolution::max_abs_residual() const {
  double m = 0.0;
  for (const auto& r : residuals) m = std::max(m, std::abs(r.value));
  return m;
}

PolicyEvaluation EquilibriumSolution::evaluation() const { return PolicyEvaluation(scenario, policy, variant); }

Revenue revenue(const PolicyEvaluation& eval) {
  Revenue r;
  r.fifo = eval.scenario().price * eval.fifo().lambda2;
  const double lambda1 = eval.hbf().lambda1;
  r.hbf = lambda1 > 0.0 ? lambda1 * (eval.scenario().min_bid + eval.bid_curve()->mean_bid()) : 0.0;
  return r;
}

Revenue revenue(const EquilibriumSolution& solution) {
  Revenue r;
  r.fifo = solution.scenario.price * solution.split.fifo.lambda2;
  const double lambda1 = solution.split.hbf.lambda1;
  r.hbf = lambda1 > 0.0 ? lambda1 * (solution.scenario.min_bid + solution.bids->mean_bid()) : 0.0;
  return r;
}

namespace {

EquilibriumSolution make_solution(const Scenario& scenario, const RoutingPolicy& policy, WaitVariant variant,
                                  SolutionKind kind) {
  PolicyEvaluation eval(scenario, policy, variant);
  EquilibriumSolution sol;
  sol.scenario = scenario;
  sol.policy = policy;
  sol.variant = variant;
  sol.kind = kind;
  sol.split = eval.split();
  sol.bids = eval.bid_curve();
  return sol;
}

// Residuals of the two-threshold conditions at one point.
struct TwoThresholdPoint {
  bool ok = false;
  double bid = 0.0;        // X(beta1)
  double d1 = 0.0;         // D1(beta1)
  double d2 = 0.0;
  double r_bid = 0.0;      // X(beta1) - c'
  double r_delay = 0.0;    // D1(beta1) - D2
  double r_cost = 0.0;     // X(beta1) + beta1 D1(beta1) - c' - beta1 D2
};

class TwoThresholdSystem {
public:
  TwoThresholdSystem(const Scenario& s, WaitVariant variant, double quad_tol)
      : s_(s), variant_(variant), quad_tol_(quad_tol), price_(s.price - s.min_bid) {}

  TwoThresholdPoint operator()(double b1, double b2) {
    ++evaluations;
    TwoThresholdPoint p;
    const double a = s_.profile.lower();
    const double b = s_.profile.upper();
    if (!(b1 >= a && b1 <= b2 && b2 <= b)) return p;
    const double q = s_.profile.cdf(b2) - s_.profile.cdf(b1);
    if (!stable_split(s_, q)) return p;
    const auto split = build_profiles(s_, RoutingPolicy::two_threshold(b1, b2), variant_);
    p.bid = bid_integral(b1, split.hbf, quad_tol_).value;
    p.d1 = sojourn_hbf(b1, split.hbf);
    p.d2 = split.fifo.d2;
    p.r_bid = p.bid - price_;
    p.r_delay = p.d1 - p.d2;
    p.r_cost = p.bid + b1 * p.d1 - price_ - b1 * p.d2;
    p.ok = true;
    return p;
  }

  double price() const noexcept { return price_; }

  int evaluations = 0;

private:
  Scenario s_;
  WaitVariant variant_;
  double quad_tol_;
  double price_;
};

struct NewtonResult {
  bool converged = false;
  double b1 = 0.0;
  double b2 = 0.0;
  int iterations = 0;
  TwoThresholdPoint point;
};

// Damped Newton on (X(beta1) - c', D1(beta1) - D2) with a forward-difference Jacobian.
NewtonResult newton_two_threshold(TwoThresholdSystem& sys, double b1, double b2, double a, double b,
                                  int max_iter, double tol) {
  NewtonResult res;
  auto norm = [](const TwoThresholdPoint& p) { return std::max(std::abs(p.r_bid), std::abs(p.r_delay)); };
  TwoThresholdPoint cur = sys(b1, b2);
  if (!cur.ok) return res;
  const double h = 1e-7 * (b - a);
  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    if (norm(cur) <= 1e-3 * tol) break;
    const double s1 = (b1 + h <= b2) ? h : -h;
    const double s2 = (b2 + h <= b) ? h : -h;
    const auto p1 = sys(b1 + s1, b2);
    const auto p2 = sys(b1, b2 + s2);
    if (!p1.ok || !p2.ok) break;
    const double j11 = (p1.r_bid - cur.r_bid) / s1;
    const double j21 = (p1.r_delay - cur.r_delay) / s1;
    const double j12 = (p2.r_bid - cur.r_bid) / s2;
    const double j22 = (p2.r_delay - cur.r_delay) / s2;
    const double det = j11 * j22 - j12 * j21;
    if (!std::isfinite(det) || det == 0.0) break;
    const double d1 = -(j22 * cur.r_bid - j12 * cur.r_delay) / det;
    const double d2 = -(-j21 * cur.r_bid + j11 * cur.r_delay) / det;

    double step = 1.0;
    bool improved = false;
    for (int k = 0; k < 40; ++k, step *= 0.5) {
      const double n1 = b1 + step * d1;
      const double n2 = b2 + step * d2;
      if (!(n1 >= a && n1 < n2 && n2 <= b)) continue;
      const auto trial = sys(n1, n2);
      if (trial.ok && norm(trial) < norm(cur)) {
        b1 = n1;
        b2 = n2;
        cur = trial;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  res.b1 = b1;
  res.b2 = b2;
  res.point = cur;
  const double r_cost = std::abs(cur.r_cost);
  res.converged = cur.ok && std::abs(cur.r_bid) <= tol && r_cost <= tol;
  return res;
}

void fill_two_threshold_residuals(EquilibriumSolution& sol, double price) {
  const double b1 = sol.policy.beta1;
  const double b2 = sol.policy.beta2;
  const double x1 = (*sol.bids)(b1);
  const double x2 = (*sol.bids)(b2);
  const double d1 = sojourn_hbf(b1, sol.split.hbf);
  const double d2 = sol.split.fifo.d2;
  sol.residuals = {
      {"bid_minus_price", x1 - price},
      {"cost_difference", x1 + b1 * d1 - price - b1 * d2},
      {"delay_difference", d1 - d2},
      {"bid_gap_across_fifo_interval", x2 - x1},
  };
}

}  // namespace

TwoThresholdOutcome solve_two_threshold(const Scenario& scenario, const TwoThresholdOptions& options) {
  scenario.validate();
  if (scenario.mu1 != scenario.mu2)
    throw InvalidArgument("two-threshold solver requires identical service rates (mu1 == mu2)");
  const double price = scenario.price - scenario.min_bid;
  if (price < 0.0)
    throw InvalidArgument("two-threshold solver requires c >= m; use the single-threshold solver when c < m");
  if (options.grid < 2) throw InvalidArgument("two-threshold grid needs at least 2 intervals");

  const double a = scenario.profile.lower();
  const double b = scenario.profile.upper();
  const WaitVariant variant = options.variant;
  TwoThresholdOutcome out;
  TwoThresholdSystem sys(scenario, variant, 0.1 * options.tol.quadrature);
  SolverDiagnostics diag;

  if (price == 0.0) {
    // X(a) = 0 already matches the price, so beta1 = a and only D1(a) = D2 remains.
    auto gap = [&](double b2) {
      const double q = scenario.profile.cdf(b2) - scenario.profile.cdf(a);
      const double lambda2 = scenario.lambda * q;
      if (scenario.lambda - lambda2 >= scenario.mu1) return kInf;
      if (lambda2 >= scenario.mu2) return -kInf;
      const auto p = sys(a, b2);
      return p.r_delay;
    };
    double lo = a;
    double hi = b;
    double g_lo = gap(lo);
    double g_hi = gap(hi);
    diag.history.push_back("reduced problem: gap(a)=" + fmt(g_lo) + " gap(b)=" + fmt(g_hi));
    if (g_lo > 0.0 && g_hi < 0.0) {
      for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, b); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double g = gap(mid);
        ++diag.iterations;
        if (g == 0.0) {
          lo = hi = mid;
          break;
        }
        (g > 0.0 ? lo : hi) = mid;
      }
      const double b2 = 0.5 * (lo + hi);
      auto sol = make_solution(scenario, RoutingPolicy::two_threshold(a, b2), variant,
                               SolutionKind::TwoThresholdReduced);
      fill_two_threshold_residuals(sol, price);
      diag.function_evaluations = sys.evaluations;
      diag.outside_interior = true;
      sol.diagnostics = diag;
      out.status = TwoThresholdStatus::Roots;
      out.roots.push_back(std::move(sol));
      return out;
    }
  } else {
    const int n = options.grid;
    std::vector<double> g(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) g[i] = a + (b - a) * i / n;
    std::vector<TwoThresholdPoint> table(static_cast<std::size_t>(n + 1) * (n + 1));
    auto at = [&](int i, int j) -> TwoThresholdPoint& { return table[static_cast<std::size_t>(i) * (n + 1) + j]; };
    for (int i = 0; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j) at(i, j) = sys(g[i], g[j]);

    auto straddles = [](double v0, double v1, double v2, double v3) {
      const double lo = std::min({v0, v1, v2, v3});
      const double hi = std::max({v0, v1, v2, v3});
      return lo <= 0.0 && hi >= 0.0;
    };

    std::vector<std::pair<double, double>> found;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 2; j < n; ++j) {
        const auto& p00 = at(i, j);
        const auto& p10 = at(i + 1, j);
        const auto& p01 = at(i, j + 1);
        const auto& p11 = at(i + 1, j + 1);
        if (!(p00.ok && p10.ok && p01.ok && p11.ok)) continue;
        if (!straddles(p00.r_bid, p10.r_bid, p01.r_bid, p11.r_bid)) continue;
        if (!straddles(p00.r_delay, p10.r_delay, p01.r_delay, p11.r_delay)) continue;
        ++out.candidate_cells;
        const double c1 = 0.5 * (g[i] + g[i + 1]);
        const double c2 = 0.5 * (g[j] + g[j + 1]);
        auto nr = newton_two_threshold(sys, c1, c2, a, b, options.max_newton_iterations, options.tol.residual);
        diag.iterations += nr.iterations;
        std::ostringstream line;
        line << "cell beta1=[" << g[i] << "," << g[i + 1] << "] beta2=[" << g[j] << "," << g[j + 1] << "] -> ";
        if (!nr.converged) {
          line << "no convergence (|r_bid|=" << std::abs(nr.point.r_bid) << ", |r_cost|=" << std::abs(nr.point.r_cost)
               << ")";
          diag.history.push_back(line.str());
          continue;
        }
        const bool duplicate = std::any_of(found.begin(), found.end(), [&](const auto& f) {
          return std::abs(f.first - nr.b1) < 1e-6 && std::abs(f.second - nr.b2) < 1e-6;
        });
        line << "root (" << fmt(nr.b1) << ", " << fmt(nr.b2) << ")" << (duplicate ? " duplicate" : "");
        diag.history.push_back(line.str());
        if (!duplicate) found.emplace_back(nr.b1, nr.b2);
      }
    }
    diag.sign_changes = out.candidate_cells;
    diag.function_evaluations = sys.evaluations;

    std::sort(found.begin(), found.end());
    for (const auto& [b1, b2] : found) {
      auto sol = make_solution(scenario, RoutingPolicy::two_threshold(b1, b2), variant,
                               SolutionKind::TwoThresholdInterior);
      fill_two_threshold_residuals(sol, price);
      sol.diagnostics = diag;
      const double edge = 1e-9 * (b - a);
      sol.diagnostics.outside_interior = b1 <= a + edge || b2 >= b - edge;
      out.roots.push_back(std::move(sol));
    }
    if (!out.roots.empty()) {
      out.status = TwoThresholdStatus::Roots;
      return out;
    }
  }

  // No interior root: everybody joining HBF is the only remaining candidate.
  if (scenario.lambda < scenario.mu1) {
    auto boundary = make_solution(scenario, RoutingPolicy::all_hbf(), variant, SolutionKind::AllHbfBoundary);
    const auto report = verify_wardrop(boundary.evaluation(), options.verify_grid, options.tol.regret);
    out.all_hbf_max_regret = report.max_regret;
    boundary.residuals = {{"max_regret", report.max_regret}};
    diag.history.push_back("all-hbf check: max regret " + fmt(report.max_regret));
    boundary.diagnostics = diag;
    if (report.satisfied()) {
      out.status = TwoThresholdStatus::AllHbf;
      out.boundary = std::move(boundary);
      return out;
    }
  }
  out.status = TwoThresholdStatus::NoEquilibrium;
  return out;
}

double single_threshold_residual(const Scenario& scenario, double beta1, WaitVariant variant) {
  const double q = scenario.profile.cdf(beta1);
  const double lambda2 = scenario.lambda * q;
  if (scenario.lambda - lambda2 >= scenario.mu1) return kInf;
  if (lambda2 >= scenario.mu2) return -kInf;
  const auto split = build_profiles(scenario, RoutingPolicy::single_low_fifo(beta1), variant);
  const double effective_min_bid = scenario.min_bid - scenario.price;
  return effective_min_bid + beta1 * sojourn_hbf(beta1, split.hbf) - beta1 * split.fifo.d2;
}

EquilibriumSolution solve_single_threshold(const Scenario& scenario, const SingleThresholdOptions& options) {
  scenario.validate();
  const double m_eff = scenario.min_bid - scenario.price;
  if (m_eff < 0.0)
    throw InvalidArgument("single-threshold solver requires c <= m; use the two-threshold solver when c > m");
  if (options.scan_points < 2) throw InvalidArgument("single-threshold scan needs at least 2 points");

  const double a = scenario.profile.lower();
  const double b = scenario.profile.upper();
  const WaitVariant variant = options.variant;
  SolverDiagnostics diag;

  auto residual = [&](double beta) {
    ++diag.function_evaluations;
    return single_threshold_residual(scenario, beta, variant);
  };
  // Same sign as the residual on (a, b]; at beta = 0 uses the limit of residual / beta.
  auto sign_of = [&](double beta) {
    if (beta > 0.0) return residual(beta);
    if (m_eff > 0.0) return 1.0;
    const double q = 0.0;
    if (!stable_split(scenario, q)) return kInf;
    const auto split = build_profiles(scenario, RoutingPolicy::single_low_fifo(beta), variant);
    return sojourn_hbf(beta, split.hbf) - split.fifo.d2;
  };

  const int n = options.scan_points;
  std::vector<double> xs(static_cast<std::size_t>(n) + 1);
  std::vector<double> signs(xs.size());
  for (int i = 0; i <= n; ++i) {
    xs[i] = a + (b - a) * i / n;
    signs[i] = sign_of(xs[i]);
  }
  int changes = 0;
  int bracket = -1;
  int prev = -1;
  for (int i = 0; i <= n; ++i) {
    if (signs[i] == 0.0) continue;
    if (prev >= 0 && (signs[prev] > 0.0) != (signs[i] > 0.0)) {
      ++changes;
      bracket = prev;
    }
    prev = i;
  }
  diag.sign_changes = changes;
  diag.history.push_back("residual scan over " + std::to_string(n + 1) + " points: " + std::to_string(changes) +
                         " sign change(s)");

  const double r_a = residual(a);
  if (r_a < 0.0) {
    auto sol = make_solution(scenario, RoutingPolicy::single_low_fifo(a), variant, SolutionKind::SingleThresholdLower);
    sol.residuals = {{"boundary_margin", r_a}};
    sol.diagnostics = diag;
    return sol;
  }
  const double r_b = residual(b);
  if (r_b > 0.0) {
    // Tie 1 so the endpoint type b also routes to FIFO.
    auto sol = make_solution(scenario, RoutingPolicy::single_low_fifo(b, 1.0), variant,
                             SolutionKind::SingleThresholdUpper);
    sol.residuals = {{"boundary_margin", r_b}};
    sol.diagnostics = diag;
    return sol;
  }

  double root = 0.0;
  if (r_b == 0.0) {
    root = b;
  } else if (r_a == 0.0 && changes == 0) {
    root = a;
  } else {
    if (changes != 1) {
      std::ostringstream os;
      os << "threshold residual shows " << changes
         << " sign changes on [a,b]; a unique interior threshold was expected";
      throw SolverError(os.str());
    }
    // Find the exact zero between scan points `bracket` and the next nonzero one.
    int next = bracket + 1;
    while (next <= n && signs[next] == 0.0) ++next;
    double lo = xs[bracket];
    double hi = xs[std::min(next, n)];
    if (next > bracket + 1) {
      root = xs[bracket + 1];
    } else {
      const bool lo_positive = signs[bracket] > 0.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double s = sign_of(mid);
        ++diag.iterations;
        if (s == 0.0) {
          lo = hi = mid;
          break;
        }
        ((s > 0.0) == lo_positive ? lo : hi) = mid;
      }
      root = 0.5 * (lo + hi);
    }
  }
  auto sol = make_solution(scenario, RoutingPolicy::single_low_fifo(root), variant,
                           SolutionKind::SingleThresholdInterior);
  sol.residuals = {{"threshold_residual", residual(root)}};
  if (std::abs(sol.residuals[0].value) > options.tolerance)
    diag.history.push_back("warning: residual " + fmt(sol.residuals[0].value) + " above tolerance");
  sol.diagnostics = diag;
  return sol;
}

double RefutationCheck::calibrated_advantage(double beta) const {
  if (candidate.form == PolicyForm::SingleLowFifo) return (candidate.beta1 - beta) * (d1_at_threshold - d2);
  return (beta - candidate.beta1) * (d2 - d1_at_threshold);
}

namespace {

// A witness must beat the prescribed cost by more than roundoff.
bool strictly_profitable(double advantage, double cost) {
  return advantage > 1e-12 * std::max(1.0, std::abs(cost));
}

std::optional<DeviationWitness> scenario_price_witness(const PolicyEvaluation& eval, int grid) {
  const auto report = verify_wardrop(eval, grid, 0.0);
  const WardropRow* worst = nullptr;
  for (const auto& row : report.rows)
    if (row.assigned && (!worst || row.regret > worst->regret)) worst = &row;
  if (!worst || !(worst->regret > 0.0)) return std::nullopt;

  DeviationWitness w;
  w.candidate = eval.policy();
  w.basis = WitnessBasis::ScenarioPrice;
  w.price = eval.scenario().price - eval.scenario().min_bid;
  w.beta = worst->beta;
  w.prescribed = *worst->assigned;
  if (w.prescribed == Side::Fifo) {
    w.cost_prescribed = worst->cost_fifo;
    w.cost_deviation = worst->cost_hbf_best;
    w.deviation_bid = eval.payment(worst->best_level_type);
  } else {
    w.cost_prescribed = worst->cost_hbf;
    const bool to_fifo = worst->cost_fifo <= worst->cost_hbf_best;
    w.cost_deviation = to_fifo ? worst->cost_fifo : worst->cost_hbf_best;
    w.deviation_bid = to_fifo ? 0.0 : eval.payment(worst->best_level_type);
  }
  w.advantage = w.cost_prescribed - w.cost_deviation;
  if (!strictly_profitable(w.advantage, w.cost_prescribed)) return std::nullopt;
  return w;
}

void require_refutation_regime(const Scenario& s) {
  if (!(s.price > s.min_bid))
    throw InvalidArgument("single-threshold refutation applies only when the admission price exceeds the minimum bid");
}

}  // namespace

RefutationCheck refute_low_fifo_threshold(const Scenario& scenario, double beta1, WaitVariant variant, int grid) {
  scenario.validate();
  require_refutation_regime(scenario);
  const double a = scenario.profile.lower();
  const double b = scenario.profile.upper();
  if (!(beta1 > a && beta1 <= b)) throw InvalidArgument("low-FIFO candidate threshold must lie in (a, b]");

  const auto policy = RoutingPolicy::single_low_fifo(beta1);
  PolicyEvaluation eval(scenario, policy, variant);
  RefutationCheck check;
  check.candidate = policy;
  check.bid_at_threshold = eval.bid(beta1);
  check.d1_at_threshold = eval.d1(beta1);
  check.d2 = eval.d2();
  check.calibrated_price = check.bid_at_threshold + beta1 * (check.d1_at_threshold - check.d2);

  if (beta1 < b && check.calibrated_price > 0.0 && check.d1_at_threshold > check.d2) {
    // Indifference at beta1 pins the price; a lower type then joins HBF with a zero
    // bid at the back of the queue and saves (beta1 - beta)(D1(beta1) - D2).
    DeviationWitness w;
    w.candidate = policy;
    w.basis = WitnessBasis::CalibratedPrice;
    w.price = check.calibrated_price;
    w.beta = 0.5 * (a + beta1);
    w.prescribed = Side::Fifo;
    w.deviation_bid = scenario.min_bid + check.bid_at_threshold;
    w.cost_prescribed = scenario.min_bid + w.price + w.beta * check.d2;
    w.cost_deviation = w.deviation_bid + w.beta * check.d1_at_threshold;
    w.advantage = w.cost_prescribed - w.cost_deviation;
    if (strictly_profitable(w.advantage, w.cost_prescribed)) {
      check.witness = w;
      check.note = "indifference requires price " + fmt(w.price) + "; lower types then prefer a zero HBF bid";
      return check;
    }
  }

  check.witness = scenario_price_witness(eval, grid);
  check.note = beta1 >= b ? "all-FIFO candidate: an empty HBF server undercuts FIFO for every type"
                          : "indifference would need a non-positive price; checked at the scenario price";
  if (!check.witness) check.note += " (no profitable deviation found)";
  return check;
}

RefutationCheck refute_high_fifo_threshold(const Scenario& scenario, double beta1, WaitVariant variant, int grid) {
  scenario.validate();
  require_refutation_regime(scenario);
  const double a = scenario.profile.lower();
  const double b = scenario.profile.upper();
  if (!(beta1 > a && beta1 < b)) throw InvalidArgument("high-FIFO candidate threshold must lie in (a, b)");

  const auto policy = RoutingPolicy::single_high_fifo(beta1);
  PolicyEvaluation eval(scenario, policy, variant);
  RefutationCheck check;
  check.candidate = policy;
  check.bid_at_threshold = eval.bid(beta1);
  check.d1_at_threshold = eval.d1(beta1);
  check.d2 = eval.d2();
  check.calibrated_price = check.bid_at_threshold + beta1 * (check.d1_at_threshold - check.d2);

  if (check.calibrated_price > 0.0 && check.d2 > check.d1_at_threshold) {
    // A higher type copies the top bid X(beta1) and gets D1(beta1) < D2.
    DeviationWitness w;
    w.candidate = policy;
    w.basis = WitnessBasis::CalibratedPrice;
    w.price = check.calibrated_price;
    w.beta = 0.5 * (beta1 + b);
    w.prescribed = Side::Fifo;
    w.deviation_bid = scenario.min_bid + check.bid_at_threshold;
    w.cost_prescribed = scenario.min_bid + w.price + w.beta * check.d2;
    w.cost_deviation = w.deviation_bid + w.beta * check.d1_at_threshold;
    w.advantage = w.cost_prescribed - w.cost_deviation;
    if (strictly_profitable(w.advantage, w.cost_prescribed)) {
      check.witness = w;
      check.note = "indifference requires price " + fmt(w.price) + "; higher types then copy the top bid";
      return check;
    }
  }

  check.witness = scenario_price_witness(eval, grid);
  if (check.calibrated_price <= 0.0)
    check.note = "indifference would need a non-positive price; checked at the scenario price";
  else
    check.note = "top-bid deviation unprofitable (D2 <= D1(beta1) = W0 + 1/mu1); checked at the scenario price";
  if (!check.witness) check.note += " (no profitable deviation found)";
  return check;
}

std::vector<double> linear_grid(double lo, double hi, int steps) {
  if (steps < 1) throw InvalidArgument("grid needs at least one step");
  std::vector<double> out(static_cast<std::size_t>(steps));
  if (steps == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < steps; ++i) out[i] = lo + (hi - lo) * i / (steps - 1);
  out.back() = hi;
  return out;
}

SweepTable sweep_admission_price(const Scenario& scenario, std::span<const double> prices,
                                 const TwoThresholdOptions& options, unsigned threads) {
  SweepTable table;
  table.rows.resize(prices.size());
  for (std::size_t i = 0; i < prices.size(); ++i) table.rows[i].price = prices[i];

  auto work = [&](std::size_t i) {
    SweepRow& row = table.rows[i];
    try {
      const Scenario s = scenario.with_price(prices[i]);
      auto outcome = solve_two_threshold(s, options);
      row.status = outcome.status;
      row.root_count = outcome.roots.size();
      const EquilibriumSolution* sol = nullptr;
      if (!outcome.roots.empty()) {
        sol = &*std::min_element(outcome.roots.begin(), outcome.roots.end(), [](const auto& x, const auto& y) {
          return x.max_abs_residual() < y.max_abs_residual();
        });
      } else if (outcome.boundary) {
        sol = &*outcome.boundary;
      }
      if (sol) {
        row.form = sol->policy.form;
        const auto [lo, hi] = sol->policy.fifo_interval(s.profile);
        row.beta1 = lo;
        row.beta2 = hi;
        row.lambda1 = sol->split.hbf.lambda1;
        row.lambda2 = sol->split.fifo.lambda2;
        row.revenue = revenue(*sol);
        if (sol->kind != SolutionKind::AllHbfBoundary) {
          row.residual_bid = sol->residual("bid_minus_price");
          row.residual_cost = sol->residual("cost_difference");
        }
      }
    } catch (const std::exception& e) {
      row.status = TwoThresholdStatus::NoEquilibrium;
      row.error = e.what();
    }
  };

  unsigned n_threads = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(std::max<std::size_t>(1, prices.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < prices.size(); i = next++) work(i);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (!row.has_equilibrium()) continue;
    if (!table.argmax_total || row.revenue.total() > table.rows[*table.argmax_total].revenue.total())
      table.argmax_total = i;
    if (!table.argmax_fifo || row.revenue.fifo > table.rows[*table.argmax_fifo].revenue.fifo)
      table.argmax_fifo = i;
  }
  return table;
}

}  // namespace hbfq
