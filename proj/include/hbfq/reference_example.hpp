#pragma once

#include "hbfq/equilibrium.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hbfq {

/// Published worked example: mu1 = mu2 = 5, lambda = 4, F uniform on [0, 10],
/// exponential service, c = 0.2017, m = 0.
Scenario reference_scenario();

/// Values as printed alongside the example.
struct PublishedValues {
  double beta1 = 1.67;
  double beta2 = 5.66;
  /// Printed under the HBF label but equal to the FIFO flow F(beta2) - F(beta1) times lambda.
  double lambda_fifo = 1.596;
  /// Printed under the FIFO label; violates lambda1 + lambda2 = lambda.
  double lambda_hbf = 3.404;
  double d2 = 0.2938;
  double w1 = 0.0938;
  double d1 = 0.2938;
  double bid = 0.2017;
};

/// Trapezoid rule in the type variable with `panels` equal panels:
///   X(beta) = integral_a^beta 2 rho1 w0 y f1(y) / (1 - rho1 + rho1 F1(y))^3 dy.
/// Independent of the rank-space adaptive quadrature.
double bid_trapezoid(double beta, const HbfProfile& hbf, long panels = 1'000'000);

struct DiscrepancyRow {
  std::string quantity;
  /// "eq2", "example", or "-" when the value does not depend on the variant.
  std::string variant;
  std::optional<double> published;
  double computed = 0.0;
  /// Secondary value, e.g. the trapezoid cross-check. NaN when unused.
  double cross_check = 0.0;
  std::string note;

  std::optional<double> residual() const {
    if (!published) return std::nullopt;
    return computed - *published;
  }
};

struct DiscrepancyReport {
  std::vector<DiscrepancyRow> rows;
  /// Largest |quadrature - trapezoid| over the bid rows.
  double max_oracle_gap = 0.0;

  const DiscrepancyRow& find(std::string_view quantity, std::string_view variant) const;
};

/// Recomputes every example quantity under both waiting-time variants at the
/// published thresholds, and runs the two-threshold solver under each.
DiscrepancyReport reference_example_report(long trapezoid_panels = 1'000'000);

void write_discrepancy_csv(std::ostream& os, const DiscrepancyReport& report);
void write_discrepancy_text(std::ostream& os, const DiscrepancyReport& report);

}  // namespace hbfq
