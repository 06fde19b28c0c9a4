#include "hbfq/hbf_core.hpp"

#include "hbfq/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hbfq {

std::string_view to_string(WaitVariant v) {
  return v == WaitVariant::Standard ? "eq2" : "example";
}

WaitVariant parse_wait_variant(std::string_view name) {
  if (name == "eq2" || name == "standard") return WaitVariant::Standard;
  if (name == "example") return WaitVariant::Example;
  throw InvalidArgument("unknown wait variant '" + std::string(name) + "' (expected eq2 or example)");
}

namespace {

// Rank-space inverse of F1 on either side of the FIFO interval. At the kink the
// two sides disagree (gap_lo vs gap_hi), so quadrature pieces pick one.
double quantile_below(double u, const HbfProfile& h) {
  if (h.fifo_mass >= 1.0) return h.profile.quantile(std::clamp(u, 0.0, 1.0));
  return h.profile.quantile(std::clamp(u * (1.0 - h.fifo_mass), 0.0, 1.0));
}

double quantile_above(double u, const HbfProfile& h) {
  if (h.fifo_mass >= 1.0) return h.profile.quantile(std::clamp(u, 0.0, 1.0));
  return h.profile.quantile(std::clamp(u * (1.0 - h.fifo_mass) + h.fifo_mass, 0.0, 1.0));
}

double density_factor(double u, const HbfProfile& h) {
  const double d = 1.0 - h.rho1 + h.rho1 * u;
  return 2.0 * h.rho1 * h.w0 / (d * d * d);
}

}  // namespace

double HbfProfile::gap_level() const noexcept {
  if (fifo_mass >= 1.0) return 0.0;
  return std::clamp(profile.cdf(gap_lo) / (1.0 - fifo_mass), 0.0, 1.0);
}

double HbfProfile::cdf(double beta) const noexcept {
  if (fifo_mass >= 1.0) return profile.cdf(beta);
  const double below = profile.cdf(std::min(beta, gap_lo));
  const double above = std::max(0.0, profile.cdf(beta) - profile.cdf(gap_hi));
  return std::clamp((below + above) / (1.0 - fifo_mass), 0.0, 1.0);
}

double HbfProfile::pdf(double beta) const noexcept {
  if (fifo_mass >= 1.0) return profile.pdf(beta);
  if (beta > gap_lo && beta < gap_hi) return 0.0;
  return profile.pdf(beta) / (1.0 - fifo_mass);
}

double HbfProfile::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("F1 quantile argument outside [0,1]");
  return u <= gap_level() ? quantile_below(u, *this) : quantile_above(u, *this);
}

LoadSplit build_profiles(const Scenario& scenario, const RoutingPolicy& policy, WaitVariant variant) {
  policy.validate(scenario.profile);
  const auto [lo, hi] = policy.fifo_interval(scenario.profile);
  const double q = scenario.profile.cdf(hi) - scenario.profile.cdf(lo);

  LoadSplit out;
  FifoLoad& fifo = out.fifo;
  fifo.lambda2 = scenario.lambda * q;
  fifo.mu2 = scenario.mu2;
  fifo.rho2 = fifo.lambda2 / scenario.mu2;

  HbfProfile& hbf = out.hbf;
  hbf.lambda1 = scenario.lambda - fifo.lambda2;
  hbf.mu1 = scenario.mu1;
  hbf.rho1 = hbf.lambda1 / scenario.mu1;
  hbf.gap_lo = lo;
  hbf.gap_hi = hi;
  hbf.fifo_mass = q;
  hbf.variant = variant;
  hbf.profile = scenario.profile;

  if (hbf.rho1 >= 1.0 || fifo.rho2 >= 1.0) {
    std::ostringstream os;
    os << "unstable routing under " << to_string(policy.form) << ": rho1=" << hbf.rho1
       << ", rho2=" << fifo.rho2;
    throw UnstableRouting(os.str());
  }

  if (hbf.lambda1 <= 0.0) {
    hbf.lambda1 = 0.0;
    hbf.rho1 = 0.0;
    hbf.w0 = 0.0;
  } else if (variant == WaitVariant::Standard) {
    hbf.w0 = hbf.lambda1 * scenario.service.second_moment() / (2.0 * scenario.mu1 * scenario.mu1);
  } else {
    hbf.w0 = 1.0 / (scenario.mu1 * scenario.mu1);
  }

  fifo.d2 = sojourn_fifo(fifo.lambda2, fifo.mu2, scenario.service);
  fifo.w2 = fifo.d2 - 1.0 / fifo.mu2;
  return out;
}

double waiting_time_at_level(double u, const HbfProfile& hbf) noexcept {
  if (hbf.empty()) return 0.0;
  const double d = 1.0 - hbf.rho1 * (1.0 - u);
  return hbf.w0 / (d * d);
}

double waiting_time(double beta, const HbfProfile& hbf) noexcept {
  return waiting_time_at_level(hbf.cdf(beta), hbf);
}

double sojourn_hbf(double beta, const HbfProfile& hbf) noexcept {
  return waiting_time(beta, hbf) + 1.0 / hbf.mu1;
}

double sojourn_fifo(double lambda2, double mu2, const ServiceDistribution& service) {
  if (!(lambda2 >= 0.0)) throw InvalidArgument("FIFO arrival rate must be >= 0");
  const double rho = lambda2 / mu2;
  if (rho >= 1.0) {
    std::ostringstream os;
    os << "FIFO server unstable: lambda2=" << lambda2 << " >= mu2=" << mu2;
    throw UnstableRouting(os.str());
  }
  const double wait = lambda2 * service.second_moment() / (2.0 * mu2 * mu2 * (1.0 - rho));
  return wait + 1.0 / mu2;
}

double bid_density(double u, const HbfProfile& hbf) {
  if (hbf.empty()) return 0.0;
  const double y = u <= hbf.gap_level() ? quantile_below(u, hbf) : quantile_above(u, hbf);
  return density_factor(u, hbf) * y;
}

QuadratureResult bid_integral(double beta, const HbfProfile& hbf, double tol) {
  QuadratureResult total;
  if (hbf.empty()) return total;
  const double upper = hbf.cdf(beta);
  const double kink = hbf.gap_level();
  auto below = [&hbf](double u) { return density_factor(u, hbf) * quantile_below(u, hbf); };
  auto above = [&hbf](double u) { return density_factor(u, hbf) * quantile_above(u, hbf); };

  const double first_hi = std::min(upper, kink);
  const bool split = upper > kink;
  const double piece_tol = split ? 0.5 * tol : tol;
  if (first_hi > 0.0) {
    auto r = adaptive_simpson(below, 0.0, first_hi, piece_tol);
    total.value += r.value;
    total.error += r.error;
    total.evaluations += r.evaluations;
  }
  if (split) {
    auto r = adaptive_simpson(above, kink, upper, piece_tol);
    total.value += r.value;
    total.error += r.error;
    total.evaluations += r.evaluations;
  }
  return total;
}

BidCurve::BidCurve(HbfProfile hbf, int cells, double tol) : profile_(std::move(hbf)), tol_(tol) {
  if (cells < 1) throw InvalidArgument("BidCurve needs at least one cell");
  levels_.reserve(static_cast<std::size_t>(cells) + 2);
  for (int i = 0; i <= cells; ++i) levels_.push_back(static_cast<double>(i) / cells);
  const double kink = profile_.gap_level();
  if (kink > 0.0 && kink < 1.0 &&
      !std::binary_search(levels_.begin(), levels_.end(), kink))
    levels_.insert(std::upper_bound(levels_.begin(), levels_.end(), kink), kink);

  cumulative_.assign(levels_.size(), 0.0);
  if (profile_.empty()) return;

  const double cell_tol = tol_ / static_cast<double>(levels_.size());
  double mean = 0.0;
  for (std::size_t i = 1; i < levels_.size(); ++i) {
    const double lo = levels_[i - 1];
    const double hi = levels_[i];
    const bool above = lo >= kink;
    auto x = [&](double u) {
      return density_factor(u, profile_) * (above ? quantile_above(u, profile_) : quantile_below(u, profile_));
    };
    auto r = adaptive_simpson(x, lo, hi, cell_tol);
    cumulative_[i] = cumulative_[i - 1] + r.value;
    error_bound_ += r.error;
    auto weighted = [&](double u) { return (1.0 - u) * x(u); };
    mean += adaptive_simpson(weighted, lo, hi, cell_tol).value;
  }
  mean_ = mean;
  error_bound_ += cell_tol;
}

double BidCurve::at_level(double u) const {
  if (profile_.empty() || u <= 0.0) return 0.0;
  if (u >= 1.0) return cumulative_.back();
  auto it = std::upper_bound(levels_.begin(), levels_.end(), u);
  const auto i = static_cast<std::size_t>(it - levels_.begin()) - 1;
  const double lo = levels_[i];
  if (u == lo) return cumulative_[i];
  const bool above = lo >= profile_.gap_level();
  auto x = [&](double v) {
    return density_factor(v, profile_) * (above ? quantile_above(v, profile_) : quantile_below(v, profile_));
  };
  const double cell_tol = tol_ / static_cast<double>(levels_.size());
  return cumulative_[i] + adaptive_simpson(x, lo, u, cell_tol).value;
}

}  // namespace hbfq
