#include "hbfq/model.hpp"

#include "hbfq/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hbfq {

namespace {

bool finite(double x) { return std::isfinite(x); }

void check_support(double a, double b) {
  if (!finite(a) || !finite(b) || a < 0.0 || !(a < b)) {
    std::ostringstream os;
    os << "type profile support must satisfy 0 <= a < b < inf (got a=" << a << ", b=" << b << ")";
    throw InvalidArgument(os.str());
  }
}

}  // namespace

TypeProfile TypeProfile::uniform(double a, double b) {
  check_support(a, b);
  TypeProfile p;
  p.kind_ = Kind::Uniform;
  p.a_ = a;
  p.b_ = b;
  return p;
}

TypeProfile TypeProfile::piecewise_linear(std::vector<double> knots, std::vector<double> probs) {
  if (knots.size() < 2 || knots.size() != probs.size())
    throw InvalidArgument("piecewise-linear profile needs >= 2 knots and one probability per knot");
  check_support(knots.front(), knots.back());
  if (probs.front() != 0.0 || probs.back() != 1.0)
    throw InvalidArgument("piecewise-linear cdf must start at 0 and end at 1");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i] > knots[i - 1]))
      throw InvalidArgument("piecewise-linear knots must be strictly increasing (a repeated knot is an atom)");
    if (!(probs[i] > probs[i - 1]))
      throw InvalidArgument("piecewise-linear cdf must be strictly increasing (zero-density segments are not supported)");
  }
  TypeProfile p;
  p.kind_ = Kind::PiecewiseLinear;
  p.a_ = knots.front();
  p.b_ = knots.back();
  p.knots_ = std::move(knots);
  p.probs_ = std::move(probs);
  return p;
}

TypeProfile TypeProfile::truncated_exponential(double a, double b, double rate) {
  check_support(a, b);
  if (!finite(rate) || !(rate > 0.0))
    throw InvalidArgument("truncated-exponential rate must be positive and finite");
  TypeProfile p;
  p.kind_ = Kind::TruncatedExponential;
  p.a_ = a;
  p.b_ = b;
  p.rate_ = rate;
  return p;
}

double TypeProfile::cdf(double beta) const noexcept {
  if (beta <= a_) return 0.0;
  if (beta >= b_) return 1.0;
  switch (kind_) {
    case Kind::Uniform:
      return (beta - a_) / (b_ - a_);
    case Kind::PiecewiseLinear: {
      auto it = std::upper_bound(knots_.begin(), knots_.end(), beta);
      const auto i = static_cast<std::size_t>(it - knots_.begin());
      const double w = (beta - knots_[i - 1]) / (knots_[i] - knots_[i - 1]);
      return probs_[i - 1] + w * (probs_[i] - probs_[i - 1]);
    }
    case Kind::TruncatedExponential:
      return -std::expm1(-rate_ * (beta - a_)) / -std::expm1(-rate_ * (b_ - a_));
  }
  return 0.0;
}

double TypeProfile::pdf(double beta) const noexcept {
  if (beta < a_ || beta > b_) return 0.0;
  switch (kind_) {
    case Kind::Uniform:
      return 1.0 / (b_ - a_);
    case Kind::PiecewiseLinear: {
      auto it = std::upper_bound(knots_.begin(), knots_.end(), beta);
      auto i = static_cast<std::size_t>(it - knots_.begin());
      if (i >= knots_.size()) i = knots_.size() - 1;
      if (i == 0) i = 1;
      return (probs_[i] - probs_[i - 1]) / (knots_[i] - knots_[i - 1]);
    }
    case Kind::TruncatedExponential:
      return rate_ * std::exp(-rate_ * (beta - a_)) / -std::expm1(-rate_ * (b_ - a_));
  }
  return 0.0;
}

double TypeProfile::quantile(double q) const {
  if (!(q >= 0.0 && q <= 1.0)) {
    std::ostringstream os;
    os << "quantile probability " << q << " outside [0,1]";
    throw InvalidArgument(os.str());
  }
  if (q == 0.0) return a_;
  if (q == 1.0) return b_;
  switch (kind_) {
    case Kind::Uniform:
      return a_ + q * (b_ - a_);
    case Kind::PiecewiseLinear: {
      auto it = std::lower_bound(probs_.begin(), probs_.end(), q);
      const auto i = static_cast<std::size_t>(it - probs_.begin());
      if (probs_[i] == q) return knots_[i];
      const double w = (q - probs_[i - 1]) / (probs_[i] - probs_[i - 1]);
      return knots_[i - 1] + w * (knots_[i] - knots_[i - 1]);
    }
    case Kind::TruncatedExponential: {
      const double mass = -std::expm1(-rate_ * (b_ - a_));
      return std::min(b_, a_ - std::log1p(-q * mass) / rate_);
    }
  }
  return a_;
}

double TypeProfile::mean() const {
  switch (kind_) {
    case Kind::Uniform:
      return 0.5 * (a_ + b_);
    case Kind::PiecewiseLinear: {
      double m = 0.0;
      for (std::size_t i = 1; i < knots_.size(); ++i)
        m += (probs_[i] - probs_[i - 1]) * 0.5 * (knots_[i] + knots_[i - 1]);
      return m;
    }
    case Kind::TruncatedExponential: {
      const double w = b_ - a_;
      const double e = std::exp(-rate_ * w);
      return a_ + 1.0 / rate_ - w * e / (1.0 - e);
    }
  }
  return 0.0;
}

std::string_view to_string(TypeProfile::Kind kind) {
  switch (kind) {
    case TypeProfile::Kind::Uniform: return "uniform";
    case TypeProfile::Kind::PiecewiseLinear: return "piecewise-linear";
    case TypeProfile::Kind::TruncatedExponential: return "truncated-exponential";
  }
  return "?";
}

ServiceDistribution ServiceDistribution::exponential() {
  ServiceDistribution s;
  s.kind_ = Kind::Exponential;
  return s;
}

ServiceDistribution ServiceDistribution::deterministic() {
  ServiceDistribution s;
  s.kind_ = Kind::Deterministic;
  return s;
}

ServiceDistribution ServiceDistribution::erlang(int k) {
  if (k < 1) throw InvalidArgument("erlang stage count must be >= 1");
  ServiceDistribution s;
  s.kind_ = Kind::Erlang;
  s.k_ = k;
  return s;
}

ServiceDistribution ServiceDistribution::hyperexponential(double p, double mean1) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("hyperexponential mixing probability must lie in (0,1)");
  if (!(mean1 > 0.0) || !(p * mean1 < 1.0))
    throw InvalidArgument("hyperexponential phase-1 mean must satisfy 0 < p*mean1 < 1");
  ServiceDistribution s;
  s.kind_ = Kind::Hyperexponential;
  s.p_ = p;
  s.m1_ = mean1;
  s.m2_ = (1.0 - p * mean1) / (1.0 - p);
  return s;
}

double ServiceDistribution::second_moment() const noexcept {
  switch (kind_) {
    case Kind::Exponential: return 2.0;
    case Kind::Deterministic: return 1.0;
    case Kind::Erlang: return 1.0 + 1.0 / k_;
    case Kind::Hyperexponential: return 2.0 * (p_ * m1_ * m1_ + (1.0 - p_) * m2_ * m2_);
  }
  return 0.0;
}

double ServiceDistribution::sample(Rng& rng) const {
  // -log(1-U) with U in [0,1) never hits log(0).
  auto expo = [&rng](double mean) { return -mean * std::log1p(-uniform01(rng)); };
  switch (kind_) {
    case Kind::Exponential: return expo(1.0);
    case Kind::Deterministic: return 1.0;
    case Kind::Erlang: {
      double s = 0.0;
      for (int i = 0; i < k_; ++i) s += expo(1.0 / k_);
      return s;
    }
    case Kind::Hyperexponential: {
      const bool first = uniform01(rng) < p_;
      return expo(first ? m1_ : m2_);
    }
  }
  return 1.0;
}

std::string_view to_string(ServiceDistribution::Kind kind) {
  switch (kind) {
    case ServiceDistribution::Kind::Exponential: return "exponential";
    case ServiceDistribution::Kind::Deterministic: return "deterministic";
    case ServiceDistribution::Kind::Erlang: return "erlang";
    case ServiceDistribution::Kind::Hyperexponential: return "hyperexponential";
  }
  return "?";
}

void Scenario::validate() const {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  auto nonneg = [](double x) { return std::isfinite(x) && x >= 0.0; };
  if (!positive(lambda)) throw InvalidArgument("lambda must be positive");
  if (!positive(mu1)) throw InvalidArgument("mu1 must be positive");
  if (!positive(mu2)) throw InvalidArgument("mu2 must be positive");
  if (!nonneg(price)) throw InvalidArgument("admission price c must be >= 0");
  if (!nonneg(min_bid)) throw InvalidArgument("minimum bid m must be >= 0");
  if (!(lambda < mu1 + mu2)) {
    std::ostringstream os;
    os << "lambda=" << lambda << " >= mu1+mu2=" << mu1 + mu2 << ": no stable routing exists";
    throw UnstableRouting(os.str());
  }
}

std::string_view to_string(PolicyForm form) {
  switch (form) {
    case PolicyForm::AllHbf: return "all-hbf";
    case PolicyForm::AllFifo: return "all-fifo";
    case PolicyForm::SingleLowFifo: return "single-threshold-low-fifo";
    case PolicyForm::SingleHighFifo: return "single-threshold-high-fifo";
    case PolicyForm::TwoThreshold: return "two-threshold";
  }
  return "?";
}

PolicyForm parse_policy_form(std::string_view name) {
  if (name == "all-hbf") return PolicyForm::AllHbf;
  if (name == "all-fifo") return PolicyForm::AllFifo;
  if (name == "single-threshold-low-fifo" || name == "single-low") return PolicyForm::SingleLowFifo;
  if (name == "single-threshold-high-fifo" || name == "single-high") return PolicyForm::SingleHighFifo;
  if (name == "two-threshold") return PolicyForm::TwoThreshold;
  throw InvalidArgument("unknown policy form '" + std::string(name) + "'");
}

void RoutingPolicy::validate(const TypeProfile& profile) const {
  if (!(tie >= 0.0 && tie <= 1.0)) throw InvalidArgument("tie fraction must lie in [0,1]");
  const double a = profile.lower();
  const double b = profile.upper();
  auto in_support = [&](double x) { return x >= a && x <= b; };
  switch (form) {
    case PolicyForm::AllHbf:
    case PolicyForm::AllFifo:
      return;
    case PolicyForm::SingleLowFifo:
    case PolicyForm::SingleHighFifo:
      if (!in_support(beta1)) throw InvalidArgument("threshold beta1 outside [a,b]");
      return;
    case PolicyForm::TwoThreshold:
      if (!in_support(beta1) || !in_support(beta2) || beta1 > beta2)
        throw InvalidArgument("two-threshold policy needs a <= beta1 <= beta2 <= b");
      return;
  }
}

std::pair<double, double> RoutingPolicy::fifo_interval(const TypeProfile& profile) const {
  const double a = profile.lower();
  const double b = profile.upper();
  switch (form) {
    case PolicyForm::AllHbf: return {b, b};
    case PolicyForm::AllFifo: return {a, b};
    case PolicyForm::SingleLowFifo: return {a, beta1};
    case PolicyForm::SingleHighFifo: return {beta1, b};
    case PolicyForm::TwoThreshold: return {beta1, beta2};
  }
  return {b, b};
}

double RoutingPolicy::fifo_probability(double beta, const TypeProfile& profile) const {
  const double a = profile.lower();
  const double b = profile.upper();
  switch (form) {
    case PolicyForm::AllHbf: return 0.0;
    case PolicyForm::AllFifo: return 1.0;
    case PolicyForm::SingleLowFifo:
      if (beta1 <= a) return 0.0;
      if (beta < beta1) return 1.0;
      return beta == beta1 ? tie : 0.0;
    case PolicyForm::SingleHighFifo:
      if (beta1 >= b) return 0.0;
      if (beta > beta1) return 1.0;
      return beta == beta1 ? tie : 0.0;
    case PolicyForm::TwoThreshold:
      if (beta > beta1 && beta < beta2) return 1.0;
      if (beta1 < beta2 && (beta == beta1 || beta == beta2)) return tie;
      return 0.0;
  }
  return 0.0;
}

double RoutingPolicy::fifo_mass(const TypeProfile& profile) const {
  const auto [lo, hi] = fifo_interval(profile);
  return profile.cdf(hi) - profile.cdf(lo);
}

}  // namespace hbfq
