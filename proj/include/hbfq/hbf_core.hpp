#pragma once

#include "hbfq/model.hpp"
#include "hbfq/quadrature.hpp"

#include <string_view>
#include <vector>

namespace hbfq {

/// Which waiting-time numerator to use at the HBF server.
///
/// `Standard` is the M/G/1 continuum-priority result
///   W(beta) = mu^2 W0 / (mu - lambda1 (1 - F1(beta)))^2,  W0 = lambda1 E[S^2] / (2 mu^2).
/// `Example` replaces mu^2 W0 by 1, which is the only reading under which the
/// published worked example (mu=5, lambda=4, uniform [0,10]) is arithmetically
/// consistent. It is a reproduction mode, not a model.
enum class WaitVariant { Standard, Example };

std::string_view to_string(WaitVariant v);
/// Accepts "eq2" / "standard" and "example".
WaitVariant parse_wait_variant(std::string_view name);

inline constexpr double kQuadratureTolerance = 1e-10;

/// Traffic at the HBF server and the type profile F1 of its joiners.
///
/// F1 is F with the FIFO interval [gap_lo, gap_hi] cut out and renormalized, so
/// it is flat on that interval. All quantities below are in terms of F1.
struct HbfProfile {
  double lambda1 = 0.0;
  double mu1 = 1.0;
  double rho1 = 0.0;
  /// Residual-work constant; W(b) == w0. Zero when lambda1 == 0.
  double w0 = 0.0;
  double gap_lo = 0.0;
  double gap_hi = 0.0;
  /// Fraction of all arrivals routed to FIFO, i.e. F(gap_hi) - F(gap_lo).
  double fifo_mass = 0.0;
  WaitVariant variant = WaitVariant::Standard;
  TypeProfile profile = TypeProfile::uniform(0.0, 1.0);

  double lower() const noexcept { return profile.lower(); }
  double upper() const noexcept { return profile.upper(); }

  /// F1(beta).
  double cdf(double beta) const noexcept;
  /// Density of F1; zero inside the FIFO interval.
  double pdf(double beta) const noexcept;
  /// Smallest beta with F1(beta) >= u.
  double quantile(double u) const;
  /// F1 value on the flat FIFO interval (the kink of the bid integrand in u).
  double gap_level() const noexcept;
  bool empty() const noexcept { return lambda1 <= 0.0; }
};

struct FifoLoad {
  double lambda2 = 0.0;
  double mu2 = 1.0;
  double rho2 = 0.0;
  /// Mean time in queue (Pollaczek-Khinchine).
  double w2 = 0.0;
  /// Mean sojourn time w2 + 1/mu2.
  double d2 = 0.0;
};

struct LoadSplit {
  HbfProfile hbf;
  FifoLoad fifo;
};

/// Splits the arrival stream according to `policy`. Throws UnstableRouting if
/// either server ends up with traffic intensity >= 1.
LoadSplit build_profiles(const Scenario& scenario, const RoutingPolicy& policy,
                         WaitVariant variant = WaitVariant::Standard);

/// Expected HBF queueing delay of a type-beta joiner.
double waiting_time(double beta, const HbfProfile& hbf) noexcept;

/// Waiting time as a function of the joiner's rank u = F1(beta) in [0,1].
double waiting_time_at_level(double u, const HbfProfile& hbf) noexcept;

/// D1(beta) = W(beta) + 1/mu1.
double sojourn_hbf(double beta, const HbfProfile& hbf) noexcept;

/// D2 = Pollaczek-Khinchine mean wait + 1/mu2. Throws UnstableRouting if lambda2 >= mu2.
double sojourn_fifo(double lambda2, double mu2, const ServiceDistribution& service);

/// Integrand of the bid in the rank variable u = F1(y):
///   X(beta) = integral_0^{F1(beta)} 2 rho1 w0 F1^{-1}(u) / (1 - rho1 + rho1 u)^3 du.
double bid_density(double u, const HbfProfile& hbf);

/// Equilibrium bid X(beta) by adaptive Simpson in the rank variable, split at
/// the FIFO-interval kink.
QuadratureResult bid_integral(double beta, const HbfProfile& hbf, double tol = kQuadratureTolerance);

inline double bid(double beta, const HbfProfile& hbf) { return bid_integral(beta, hbf).value; }

/// Cached evaluator for X(beta). Cumulative integrals are stored on a rank grid
/// at construction; each query integrates only within one grid cell.
class BidCurve {
public:
  explicit BidCurve(HbfProfile hbf, int cells = 1024, double tol = kQuadratureTolerance);

  double operator()(double beta) const { return at_level(profile_.cdf(beta)); }
  double at_level(double u) const;

  /// Upper bound on the absolute error of any evaluation.
  double error_bound() const noexcept { return error_bound_; }

  /// Mean bid of an HBF joiner, E_{F1}[X], via integration by parts:
  ///   integral_0^1 X(u) du = integral_0^1 (1 - u) x(u) du.
  double mean_bid() const noexcept { return mean_; }

  const HbfProfile& profile() const noexcept { return profile_; }

private:
  HbfProfile profile_;
  double tol_;
  std::vector<double> levels_;
  std::vector<double> cumulative_;
  double error_bound_ = 0.0;
  double mean_ = 0.0;
};

}  // namespace hbfq
