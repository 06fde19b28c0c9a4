#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hbfq {

/// Random engine used by every sampler. Callers own the state.
using Rng = std::mt19937_64;

/// Uniform draw on [0,1) built from the top 53 bits, so sequences are identical
/// across standard libraries.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Distribution of the delay sensitivity (cost per unit delay) on [a, b].
///
/// Only absolutely continuous profiles with strictly positive density on
/// (a, b) are representable, so `quantile(cdf(x)) == x` on the open support.
class TypeProfile {
public:
  enum class Kind { Uniform, PiecewiseLinear, TruncatedExponential };

  static TypeProfile uniform(double a, double b);

  /// Linear interpolation of the cdf through (knots[i], probs[i]). Requires
  /// strictly increasing knots and probs, probs.front() == 0, probs.back() == 1.
  static TypeProfile piecewise_linear(std::vector<double> knots, std::vector<double> probs);

  /// Exponential density with the given rate, truncated to [a, b].
  static TypeProfile truncated_exponential(double a, double b, double rate);

  Kind kind() const noexcept { return kind_; }
  double lower() const noexcept { return a_; }
  double upper() const noexcept { return b_; }
  double rate() const noexcept { return rate_; }
  std::span<const double> knots() const noexcept { return knots_; }
  std::span<const double> probs() const noexcept { return probs_; }

  double cdf(double beta) const noexcept;
  double pdf(double beta) const noexcept;
  /// Smallest beta with cdf(beta) >= q. Throws InvalidArgument outside [0,1].
  double quantile(double q) const;
  double mean() const;

  double sample(Rng& rng) const { return quantile(uniform01(rng)); }

private:
  TypeProfile() = default;

  Kind kind_ = Kind::Uniform;
  double a_ = 0.0;
  double b_ = 1.0;
  double rate_ = 0.0;
  std::vector<double> knots_;
  std::vector<double> probs_;
};

std::string_view to_string(TypeProfile::Kind kind);

/// Unit-mean service requirement. A server of rate mu serves a job of
/// requirement S in S / mu time units.
class ServiceDistribution {
public:
  enum class Kind { Exponential, Deterministic, Erlang, Hyperexponential };

  static ServiceDistribution exponential();
  static ServiceDistribution deterministic();
  static ServiceDistribution erlang(int k);
  /// Two-phase mixture: phase 1 with probability p and mean `mean1`; phase 2
  /// mean is fixed by the unit-mean constraint.
  static ServiceDistribution hyperexponential(double p, double mean1);

  Kind kind() const noexcept { return kind_; }
  int stages() const noexcept { return k_; }
  double mix_probability() const noexcept { return p_; }
  double phase_mean1() const noexcept { return m1_; }
  double phase_mean2() const noexcept { return m2_; }

  double mean() const noexcept { return 1.0; }
  double second_moment() const noexcept;
  double sample(Rng& rng) const;

private:
  ServiceDistribution() = default;

  Kind kind_ = Kind::Exponential;
  int k_ = 1;
  double p_ = 1.0;
  double m1_ = 1.0;
  double m2_ = 1.0;
};

std::string_view to_string(ServiceDistribution::Kind kind);

/// Full system parameterization: Poisson arrivals of rate `lambda` split between
/// an HBF server (rate `mu1`) and a FIFO server (rate `mu2`) that charges `price`.
/// `min_bid` is the mandatory minimum payment at the HBF server.
struct Scenario {
  double lambda = 1.0;
  double mu1 = 1.0;
  double mu2 = 1.0;
  double price = 0.0;
  double min_bid = 0.0;
  TypeProfile profile = TypeProfile::uniform(0.0, 1.0);
  ServiceDistribution service = ServiceDistribution::exponential();

  /// Throws InvalidArgument when any invariant is violated.
  void validate() const;

  Scenario with_price(double c) const {
    Scenario s = *this;
    s.price = c;
    return s;
  }
};

enum class Side { Hbf = 0, Fifo = 1 };

inline std::string_view to_string(Side side) { return side == Side::Hbf ? "hbf" : "fifo"; }

enum class PolicyForm {
  AllHbf,
  AllFifo,
  SingleLowFifo,   // FIFO below beta1, HBF above
  SingleHighFifo,  // HBF below beta1, FIFO above
  TwoThreshold,    // FIFO strictly between beta1 and beta2, HBF elsewhere
};

std::string_view to_string(PolicyForm form);
/// Accepts the long names and the short CLI aliases (single-low, single-high).
PolicyForm parse_policy_form(std::string_view name);

/// Routing function p(beta) = probability that a type-beta customer joins FIFO.
/// Every supported form sends an interval of types to FIFO; `tie` is the FIFO
/// probability at the interval's interior endpoints.
struct RoutingPolicy {
  PolicyForm form = PolicyForm::AllHbf;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double tie = 0.0;

  static RoutingPolicy all_hbf() { return {PolicyForm::AllHbf, 0.0, 0.0, 0.0}; }
  static RoutingPolicy all_fifo() { return {PolicyForm::AllFifo, 0.0, 0.0, 0.0}; }
  static RoutingPolicy single_low_fifo(double b1, double t = 0.0) {
    return {PolicyForm::SingleLowFifo, b1, b1, t};
  }
  static RoutingPolicy single_high_fifo(double b1, double t = 0.0) {
    return {PolicyForm::SingleHighFifo, b1, b1, t};
  }
  static RoutingPolicy two_threshold(double b1, double b2, double t = 0.0) {
    return {PolicyForm::TwoThreshold, b1, b2, t};
  }

  void validate(const TypeProfile& profile) const;

  /// The FIFO interval [lo, hi] on the profile's support; lo == hi when empty.
  std::pair<double, double> fifo_interval(const TypeProfile& profile) const;

  double fifo_probability(double beta, const TypeProfile& profile) const;

  /// Fraction of all arrivals routed to FIFO.
  double fifo_mass(const TypeProfile& profile) const;
};

}  // namespace hbfq
