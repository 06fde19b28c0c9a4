#include "hbfq/reference_example.hpp"

#include "hbfq/error.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace hbfq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double x, const char* format = "%.17g") {
  if (std::isnan(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, format, x);
  return buf;
}

}  // namespace

Scenario reference_scenario() {
  Scenario s;
  s.lambda = 4.0;
  s.mu1 = 5.0;
  s.mu2 = 5.0;
  s.price = 0.2017;
  s.min_bid = 0.0;
  s.profile = TypeProfile::uniform(0.0, 10.0);
  s.service = ServiceDistribution::exponential();
  return s;
}

double bid_trapezoid(double beta, const HbfProfile& hbf, long panels) {
  if (panels < 1) throw InvalidArgument("trapezoid needs at least one panel");
  if (hbf.empty()) return 0.0;
  const double a = hbf.lower();
  const double hi = std::min(beta, hbf.upper());
  if (hi <= a) return 0.0;
  auto g = [&](double y) {
    const double d = 1.0 - hbf.rho1 + hbf.rho1 * hbf.cdf(y);
    return 2.0 * hbf.rho1 * hbf.w0 * y * hbf.pdf(y) / (d * d * d);
  };
  const double h = (hi - a) / static_cast<double>(panels);
  double sum = 0.5 * (g(a) + g(hi));
  for (long i = 1; i < panels; ++i) sum += g(a + h * static_cast<double>(i));
  return sum * h;
}

const DiscrepancyRow& DiscrepancyReport::find(std::string_view quantity, std::string_view variant) const {
  for (const auto& r : rows)
    if (r.quantity == quantity && r.variant == variant) return r;
  throw InvalidArgument("no discrepancy row " + std::string(quantity) + "/" + std::string(variant));
}

DiscrepancyReport reference_example_report(long trapezoid_panels) {
  const Scenario s = reference_scenario();
  const PublishedValues pub;
  const auto policy = RoutingPolicy::two_threshold(pub.beta1, pub.beta2);
  DiscrepancyReport rep;

  auto add = [&](std::string q, std::string v, std::optional<double> published, double computed,
                 double cross = kNaN, std::string note = {}) {
    rep.rows.push_back({std::move(q), std::move(v), published, computed, cross, std::move(note)});
  };

  const auto base = build_profiles(s, policy, WaitVariant::Standard);
  add("lambda_fifo", "-", pub.lambda_fifo, base.fifo.lambda2, kNaN, "printed under the HBF label");
  add("lambda_hbf", "-", pub.lambda_hbf, base.hbf.lambda1, kNaN,
      "printed under the FIFO label; printed value breaks lambda1 + lambda2 = lambda");
  add("d2", "-", pub.d2, base.fifo.d2);
  add("f1_at_threshold", "-", std::nullopt, base.hbf.cdf(pub.beta1), base.hbf.cdf(pub.beta2),
      "cross_check column holds F1(beta2); equal by the flat gap");

  for (WaitVariant v : {WaitVariant::Example, WaitVariant::Standard}) {
    const std::string vn(to_string(v));
    const auto split = build_profiles(s, policy, v);
    const auto& h = split.hbf;
    add("w0", vn, std::nullopt, h.w0);
    add("w1_at_beta1", vn, pub.w1, waiting_time(pub.beta1, h));
    add("d1_at_beta1", vn, pub.d1, sojourn_hbf(pub.beta1, h));
    add("delay_gap_at_beta1", vn, std::nullopt, sojourn_hbf(pub.beta1, h) - split.fifo.d2, kNaN,
        "D1(beta1) - D2; zero at an equilibrium");

    const double x1 = bid_integral(pub.beta1, h).value;
    const double t1 = bid_trapezoid(pub.beta1, h, trapezoid_panels);
    rep.max_oracle_gap = std::max(rep.max_oracle_gap, std::abs(x1 - t1));
    add("bid_at_beta1", vn, pub.bid, x1, t1, "cross_check is the trapezoid oracle; residual reported, not asserted");
    const double x2 = bid_integral(pub.beta2, h).value;
    add("bid_at_beta2", vn, std::nullopt, x2, x2 - x1, "cross_check column holds X(beta2) - X(beta1)");

    TwoThresholdOptions opt;
    opt.variant = v;
    const auto out = solve_two_threshold(s, opt);
    add("solver_root_count", vn, std::nullopt, static_cast<double>(out.roots.size()), kNaN,
        std::string(to_string(out.status)));
    if (!out.roots.empty()) {
      const auto& r = out.roots.front();
      add("solver_beta1", vn, pub.beta1, r.policy.beta1);
      add("solver_beta2", vn, pub.beta2, r.policy.beta2);
      add("solver_lambda_fifo", vn, pub.lambda_fifo, r.split.fifo.lambda2);
      add("solver_max_residual", vn, std::nullopt, r.max_abs_residual());
    } else {
      add("solver_beta1", vn, pub.beta1, kNaN, kNaN, "no root");
      add("solver_beta2", vn, pub.beta2, kNaN, kNaN, "no root");
    }
  }
  return rep;
}

void write_discrepancy_csv(std::ostream& os, const DiscrepancyReport& report) {
  os << "quantity,variant,published,computed,residual,cross_check,computed_display,note\n";
  for (const auto& r : report.rows) {
    const auto res = r.residual();
    os << r.quantity << ',' << r.variant << ',' << (r.published ? num(*r.published) : "") << ',' << num(r.computed)
       << ',' << (res ? num(*res) : "") << ',' << num(r.cross_check) << ',' << num(r.computed, "%.4f") << ",\""
       << r.note << "\"\n";
  }
}

void write_discrepancy_text(std::ostream& os, const DiscrepancyReport& report) {
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %-8s %12s %14s %14s %14s\n", "quantity", "variant", "published",
                "computed", "residual", "cross-check");
  os << line;
  for (const auto& r : report.rows) {
    const auto res = r.residual();
    std::snprintf(line, sizeof line, "%-20s %-8s %12s %14s %14s %14s", r.quantity.c_str(), r.variant.c_str(),
                  r.published ? num(*r.published, "%.4f").c_str() : "-", num(r.computed, "%.8f").c_str(),
                  res ? num(*res, "%+.3e").c_str() : "-",
                  std::isnan(r.cross_check) ? "-" : num(r.cross_check, "%.8f").c_str());
    os << line;
    if (!r.note.empty()) os << "  " << r.note;
    os << '\n';
  }
  std::snprintf(line, sizeof line, "max |quadrature - trapezoid| over bid rows: %.3e\n", report.max_oracle_gap);
  os << line;
}

}  // namespace hbfq
