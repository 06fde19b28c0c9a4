#pragma once

#include "hbfq/hbf_core.hpp"
#include "hbfq/model.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hbfq {

/// Solver, verifier and quadrature tolerances, one order apart so failures localize.
struct Tolerances {
  double residual = 1e-8;
  double regret = 1e-6;
  double quadrature = kQuadratureTolerance;
};

/// Both servers priced under one fixed routing policy.
class PolicyEvaluation {
public:
  PolicyEvaluation(const Scenario& scenario, const RoutingPolicy& policy,
                   WaitVariant variant = WaitVariant::Standard, int bid_cells = 1024);

  const Scenario& scenario() const noexcept { return scenario_; }
  const RoutingPolicy& policy() const noexcept { return policy_; }
  const LoadSplit& split() const noexcept { return split_; }
  const HbfProfile& hbf() const noexcept { return split_.hbf; }
  const FifoLoad& fifo() const noexcept { return split_.fifo; }
  std::shared_ptr<const BidCurve> bid_curve() const noexcept { return bids_; }
  WaitVariant variant() const noexcept { return split_.hbf.variant; }

  /// X(beta), the bid on top of the minimum bid.
  double bid(double beta) const { return (*bids_)(beta); }
  /// Total HBF payment m + X(beta).
  double payment(double beta) const { return scenario_.min_bid + bid(beta); }
  double d1(double beta) const noexcept { return sojourn_hbf(beta, split_.hbf); }
  double d2() const noexcept { return split_.fifo.d2; }

  double cost_fifo(double beta) const noexcept { return scenario_.price + beta * d2(); }
  /// Cost of a type-beta HBF joiner bidding its own equilibrium bid.
  double cost_hbf(double beta) const { return payment(beta) + beta * d1(beta); }

private:
  Scenario scenario_;
  RoutingPolicy policy_;
  LoadSplit split_;
  std::shared_ptr<const BidCurve> bids_;
};

/// A bid level an HBF deviator can copy: the payment of type `type` and the
/// sojourn it buys.
struct BidLevel {
  double type = 0.0;
  double payment = 0.0;
  double sojourn = 0.0;
};

/// Levels of the given types plus the policy thresholds and support ends.
std::vector<BidLevel> attainable_levels(const PolicyEvaluation& eval, std::span<const double> types);

/// min over levels of payment + beta * sojourn.
BidLevel best_level(double beta, std::span<const BidLevel> levels);

struct WardropRow {
  double beta = 0.0;
  double fifo_probability = 0.0;
  double cost_fifo = 0.0;
  /// Own-bid HBF cost m + X(beta) + beta D1(beta).
  double cost_hbf = 0.0;
  /// Cheapest attainable HBF cost for this type, and the level type achieving it.
  double cost_hbf_best = 0.0;
  double best_level_type = 0.0;
  /// Hbf, Fifo, or nullopt for a randomized type (0 < p < 1).
  std::optional<Side> assigned;
  double regret = 0.0;
};

struct WardropReport {
  RoutingPolicy policy;
  WaitVariant variant = WaitVariant::Standard;
  std::vector<WardropRow> rows;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double d2 = 0.0;
  double max_regret = 0.0;
  double tolerance = 0.0;
  /// Type with the largest regret, when that regret exceeds the tolerance.
  std::optional<double> violating_beta;

  bool satisfied() const noexcept { return !violating_beta.has_value(); }
};

/// Checks the Wardrop routing condition on a uniform grid over [a, b]:
/// p > 0 needs FIFO weakly preferred, p < 1 needs HBF weakly preferred, and
/// 0 < p < 1 needs indifference. HBF deviation cost is minimized over the
/// attainable bid levels on the same grid.
WardropReport verify_wardrop(const Scenario& scenario, const RoutingPolicy& policy, int grid_size = 1000,
                             WaitVariant variant = WaitVariant::Standard, double tolerance = 1e-6);

WardropReport verify_wardrop(const PolicyEvaluation& eval, int grid_size = 1000, double tolerance = 1e-6);

struct NamedValue {
  std::string name;
  double value = 0.0;
};

enum class SolutionKind {
  TwoThresholdInterior,
  TwoThresholdReduced,   // zero effective price: beta1 = a, one-dimensional solve for beta2
  AllHbfBoundary,
  SingleThresholdLower,  // beta1 = a: everybody joins HBF
  SingleThresholdUpper,  // beta1 = b: everybody joins FIFO
  SingleThresholdInterior,
};

std::string_view to_string(SolutionKind kind);

struct SolverDiagnostics {
  int iterations = 0;
  int function_evaluations = 0;
  /// Residual-scan sign changes (single-threshold) or candidate cells (two-threshold).
  int sign_changes = 0;
  /// True when a two-threshold root touches the support boundary.
  bool outside_interior = false;
  std::vector<std::string> history;
};

struct EquilibriumSolution {
  Scenario scenario;
  RoutingPolicy policy;
  WaitVariant variant = WaitVariant::Standard;
  SolutionKind kind = SolutionKind::TwoThresholdInterior;
  LoadSplit split;
  std::shared_ptr<const BidCurve> bids;
  std::vector<NamedValue> residuals;
  SolverDiagnostics diagnostics;

  double residual(std::string_view name) const;
  double max_abs_residual() const;
  PolicyEvaluation evaluation() const;
};

struct Revenue {
  double fifo = 0.0;  // c * lambda2
  double hbf = 0.0;   // lambda1 * (m + E_F1[X])
  double total() const noexcept { return fifo + hbf; }
};

Revenue revenue(const EquilibriumSolution& solution);
Revenue revenue(const PolicyEvaluation& eval);

struct TwoThresholdOptions {
  int grid = 200;
  int max_newton_iterations = 60;
  int verify_grid = 1000;
  WaitVariant variant = WaitVariant::Standard;
  Tolerances tol;
};

enum class TwoThresholdStatus { Roots, AllHbf, NoEquilibrium };

std::string_view to_string(TwoThresholdStatus status);

struct TwoThresholdOutcome {
  TwoThresholdStatus status = TwoThresholdStatus::NoEquilibrium;
  /// Every distinct root found; multiplicity is reported, never resolved.
  std::vector<EquilibriumSolution> roots;
  /// Filled when no root exists and everybody joining HBF is an equilibrium.
  std::optional<EquilibriumSolution> boundary;
  /// Max regret of the all-HBF policy, checked whenever no root is found.
  std::optional<double> all_hbf_max_regret;
  int candidate_cells = 0;
};

/// Two thresholds a < beta1 < beta2 < b with X(beta1) = c - m and
/// X(beta1) + beta1 D1(beta1) = (c - m) + beta1 D2. Requires mu1 == mu2 and c >= m.
TwoThresholdOutcome solve_two_threshold(const Scenario& scenario, const TwoThresholdOptions& options = {});

struct SingleThresholdOptions {
  int scan_points = 512;
  double tolerance = 1e-10;
  WaitVariant variant = WaitVariant::Standard;
};

/// Threshold beta1 with FIFO below and HBF above, solving
/// m' + beta1 D1(beta1) = beta1 D2 for the effective minimum bid m' = m - c >= 0.
/// Throws SolverError if the residual scan does not show exactly one sign change
/// when an interior root is required.
EquilibriumSolution solve_single_threshold(const Scenario& scenario, const SingleThresholdOptions& options = {});

/// Residual m' + beta1 D1(beta1) - beta1 D2 of the low-FIFO single-threshold policy;
/// +inf / -inf when the HBF / FIFO server would be unstable.
double single_threshold_residual(const Scenario& scenario, double beta1, WaitVariant variant = WaitVariant::Standard);

enum class WitnessBasis {
  /// The candidate can only be indifferent at its calibrated price; at that price
  /// the exhibited type profits from switching.
  CalibratedPrice,
  /// The calibrated deviation does not apply; the witness is the largest regret
  /// at the scenario's own price.
  ScenarioPrice,
};

std::string_view to_string(WitnessBasis basis);

struct DeviationWitness {
  RoutingPolicy candidate;
  WitnessBasis basis = WitnessBasis::CalibratedPrice;
  /// Effective FIFO price (c - m) at which the witness is evaluated.
  double price = 0.0;
  double beta = 0.0;
  Side prescribed = Side::Fifo;
  double deviation_bid = 0.0;
  double cost_prescribed = 0.0;
  double cost_deviation = 0.0;
  double advantage = 0.0;
};

/// Outcome of trying to refute a single-threshold candidate when c > m.
struct RefutationCheck {
  RoutingPolicy candidate;
  /// Effective price c - m that would make the threshold type indifferent.
  double calibrated_price = 0.0;
  double bid_at_threshold = 0.0;
  double d1_at_threshold = 0.0;
  double d2 = 0.0;
  std::optional<DeviationWitness> witness;
  std::string note;

  bool refuted() const noexcept { return witness.has_value(); }

  /// Advantage of type beta under the calibrated-price deviation argument. For the
  /// low-FIFO candidate the deviator (beta < beta1) bids zero and sits at the back
  /// of the HBF queue; for the high-FIFO candidate the deviator (beta > beta1)
  /// copies the top bid X(beta1).
  double calibrated_advantage(double beta) const;
};

/// FIFO below beta1, HBF above. Candidate must lie in (a, b].
RefutationCheck refute_low_fifo_threshold(const Scenario& scenario, double beta1,
                                          WaitVariant variant = WaitVariant::Standard, int grid = 1000);

/// HBF below beta1, FIFO above. Candidate must lie in (a, b).
RefutationCheck refute_high_fifo_threshold(const Scenario& scenario, double beta1,
                                           WaitVariant variant = WaitVariant::Standard, int grid = 1000);

struct SweepRow {
  double price = 0.0;
  TwoThresholdStatus status = TwoThresholdStatus::NoEquilibrium;
  std::size_t root_count = 0;
  PolicyForm form = PolicyForm::AllHbf;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Revenue revenue;
  double residual_bid = 0.0;
  double residual_cost = 0.0;
  std::string error;

  bool has_equilibrium() const noexcept { return status != TwoThresholdStatus::NoEquilibrium && error.empty(); }
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::optional<std::size_t> argmax_total;
  std::optional<std::size_t> argmax_fifo;
};

/// Solves the two-threshold problem at each price, independently and in parallel.
/// Per-price failures are recorded in the row; the sweep never aborts.
SweepTable sweep_admission_price(const Scenario& scenario, std::span<const double> prices,
                                 const TwoThresholdOptions& options = {}, unsigned threads = 0);

std::vector<double> linear_grid(double lo, double hi, int steps);

}  // namespace hbfq
