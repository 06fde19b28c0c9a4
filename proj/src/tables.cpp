#include "hbfq/tables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace hbfq {

std::string csv_number(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_display(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void write_solution_csv(std::ostream& os, std::span<const EquilibriumSolution> solutions, int verify_grid) {
  os << "root,quantity,value,display\n";
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    const auto& sol = solutions[i];
    auto row = [&](std::string_view name, double v) {
      os << i << ',' << name << ',' << csv_number(v) << ',' << csv_display(v) << '\n';
    };
    auto label = [&](std::string_view name, std::string_view v) { os << i << ',' << name << ',' << v << ',' << v << '\n'; };

    const auto eval = sol.evaluation();
    const auto& prof = sol.scenario.profile;
    const double a = prof.lower();
    const double b = prof.upper();
    const double price = sol.scenario.price - sol.scenario.min_bid;

    label("kind", to_string(sol.kind));
    label("form", to_string(sol.policy.form));
    label("variant", to_string(sol.variant));
    row("beta1", sol.policy.beta1);
    row("beta2", sol.policy.beta2);
    row("lambda_hbf", sol.split.hbf.lambda1);
    row("lambda_fifo", sol.split.fifo.lambda2);
    row("rho_hbf", sol.split.hbf.rho1);
    row("rho_fifo", sol.split.fifo.rho2);
    row("w0", sol.split.hbf.w0);
    row("d2", sol.split.fifo.d2);
    row("d1_at_beta1", eval.d1(sol.policy.beta1));
    row("bid_at_beta1", eval.bid(sol.policy.beta1));
    if (sol.policy.form == PolicyForm::TwoThreshold) {
      row("bid_at_beta2", eval.bid(sol.policy.beta2));
      const double x1 = eval.bid(sol.policy.beta1);
      // Condition 1 as a margin: positive iff a < beta1 < beta2 < b.
      row("condition_1_interior_margin",
          std::min({sol.policy.beta1 - a, sol.policy.beta2 - sol.policy.beta1, b - sol.policy.beta2}));
      row("condition_2_bid_minus_price", x1 - price);
      row("condition_3_cost_difference",
          x1 + sol.policy.beta1 * eval.d1(sol.policy.beta1) - price - sol.policy.beta1 * eval.d2());
    }
    for (const auto& r : sol.residuals) row("residual_" + r.name, r.value);
    row("outside_interior", sol.diagnostics.outside_interior ? 1.0 : 0.0);
    row("iterations", sol.diagnostics.iterations);
    row("sign_changes", sol.diagnostics.sign_changes);
    const Revenue rev = revenue(sol);
    row("revenue_fifo", rev.fifo);
    row("revenue_hbf", rev.hbf);
    row("revenue_total", rev.total());
    row("verify_max_regret", verify_wardrop(eval, verify_grid).max_regret);
  }
}

void write_wardrop_csv(std::ostream& os, const WardropReport& report) {
  os << "beta,fifo_probability,assigned,cost_fifo,cost_hbf,cost_hbf_best,best_level_type,regret,violation\n";
  for (const auto& r : report.rows) {
    os << csv_number(r.beta) << ',' << csv_number(r.fifo_probability) << ','
       << (r.assigned ? to_string(*r.assigned) : std::string_view("mixed")) << ',' << csv_number(r.cost_fifo) << ','
       << csv_number(r.cost_hbf) << ',' << csv_number(r.cost_hbf_best) << ',' << csv_number(r.best_level_type) << ','
       << csv_number(r.regret) << ',' << (r.regret > report.tolerance ? 1 : 0) << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const SweepTable& table) {
  os << "price,status,root_count,form,beta1,beta2,lambda_hbf,lambda_fifo,revenue_fifo,revenue_hbf,revenue_total,"
        "revenue_total_display,residual_bid,residual_cost,argmax_total,argmax_fifo,error\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const bool ok = r.has_equilibrium();
    auto n = [&](double v) { return ok ? csv_number(v) : std::string(); };
    os << csv_number(r.price) << ',' << (r.error.empty() ? to_string(r.status) : std::string_view("error")) << ','
       << r.root_count << ',' << (ok ? to_string(r.form) : std::string_view()) << ',' << n(r.beta1) << ','
       << n(r.beta2) << ',' << n(r.lambda1) << ',' << n(r.lambda2) << ',' << n(r.revenue.fifo) << ','
       << n(r.revenue.hbf) << ',' << n(r.revenue.total()) << ','
       << (ok ? csv_display(r.revenue.total()) : std::string()) << ',' << n(r.residual_bid) << ','
       << n(r.residual_cost) << ',' << (table.argmax_total == i ? 1 : 0) << ',' << (table.argmax_fifo == i ? 1 : 0)
       << ",\"" << r.error << "\"\n";
  }
}

}  // namespace hbfq
