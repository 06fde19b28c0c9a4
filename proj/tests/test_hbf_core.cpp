#include "hbfq/error.hpp"
#include "hbfq/hbf_core.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace hbfq;

namespace {

Scenario example(double price = 0.2017) {
  Scenario s;
  s.lambda = 4.0;
  s.mu1 = s.mu2 = 5.0;
  s.price = price;
  s.profile = TypeProfile::uniform(0.0, 10.0);
  return s;
}

// Composite Simpson on [lo, hi], n even.
template <class F>
double simpson(const F& f, double lo, double hi, int n = 20'000) {
  if (!(hi > lo)) return 0.0;
  const double h = (hi - lo) / n;
  double sum = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return sum * h / 3.0;
}

// Type-space form of the bid: X(beta) = int_a^beta y * (-dW/dy) dy, with the closed-form
// derivative of W = w0 / (1 - rho1 (1 - F1))^2. Independent of the rank-space quadrature.
double bid_oracle(double beta, const HbfProfile& h) {
  auto integrand = [&](double y) {
    const double d = 1.0 - h.rho1 * (1.0 - h.cdf(y));
    return y * 2.0 * h.w0 * h.rho1 * h.pdf(y) / (d * d * d);
  };
  const double a = h.lower();
  double x = simpson(integrand, a, std::min(beta, h.gap_lo));
  if (beta > h.gap_hi) x += simpson(integrand, h.gap_hi, beta);
  return x;
}

struct Case {
  const char* name;
  Scenario scenario;
  RoutingPolicy policy;
};

std::vector<Case> property_cases() {
  std::vector<Case> out;
  const std::vector<TypeProfile> profiles = {TypeProfile::uniform(0.5, 4.0),
                                             TypeProfile::truncated_exponential(0.5, 4.0, 0.8)};
  const std::vector<ServiceDistribution> services = {ServiceDistribution::exponential(),
                                                     ServiceDistribution::deterministic(),
                                                     ServiceDistribution::erlang(2)};
  for (const auto& p : profiles) {
    for (const auto& g : services) {
      Scenario s;
      s.lambda = 1.6;
      s.mu1 = s.mu2 = 1.0;
      s.price = 0.3;
      s.profile = p;
      s.service = g;
      out.push_back({"two-threshold", s, RoutingPolicy::two_threshold(p.quantile(0.3), p.quantile(0.7))});
      out.push_back({"single-low", s, RoutingPolicy::single_low_fifo(p.quantile(0.45))});
      out.push_back({"single-high", s, RoutingPolicy::single_high_fifo(p.quantile(0.55))});
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("hbf_core") {
  TEST_CASE("loads and FIFO delay at the published thresholds") {
    const auto split = build_profiles(example(), RoutingPolicy::two_threshold(1.67, 5.66));
    CHECK(split.fifo.lambda2 == doctest::Approx(1.596).epsilon(1e-14));
    CHECK(split.hbf.lambda1 == doctest::Approx(2.404).epsilon(1e-14));
    CHECK(split.fifo.lambda2 + split.hbf.lambda1 == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(split.fifo.d2 == doctest::Approx(1.0 / (5.0 - 1.596)).epsilon(1e-14));
    // Standard numerator: lambda1 * E[S^2] / (2 mu1^2).
    CHECK(split.hbf.w0 == doctest::Approx(2.404 * 2.0 / 50.0).epsilon(1e-14));
    const auto ex = build_profiles(example(), RoutingPolicy::two_threshold(1.67, 5.66), WaitVariant::Example);
    CHECK(ex.hbf.w0 == doctest::Approx(1.0 / 25.0).epsilon(1e-14));
  }

  TEST_CASE("waiting time closed form for uniform types") {
    const auto split = build_profiles(example(), RoutingPolicy::two_threshold(1.67, 5.66), WaitVariant::Example);
    const auto& h = split.hbf;
    const double f1 = 0.167 / 0.601;
    const double rho1 = 2.404 / 5.0;
    CHECK(h.cdf(1.67) == doctest::Approx(f1).epsilon(1e-13));
    CHECK(h.cdf(5.66) == doctest::Approx(f1).epsilon(1e-13));
    CHECK(waiting_time(1.67, h) == doctest::Approx(0.04 / std::pow(1.0 - rho1 * (1.0 - f1), 2)).epsilon(1e-13));
    CHECK(sojourn_hbf(1.67, h) == doctest::Approx(waiting_time(1.67, h) + 0.2).epsilon(1e-15));
  }

  TEST_CASE("Pollaczek-Khinchine FIFO delay") {
    CHECK(sojourn_fifo(2.0, 5.0, ServiceDistribution::exponential()) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    // Deterministic service halves the M/M/1 queueing delay.
    const double wq = sojourn_fifo(2.0, 5.0, ServiceDistribution::deterministic()) - 0.2;
    CHECK(wq == doctest::Approx(0.5 * (1.0 / 3.0 - 0.2)).epsilon(1e-14));
    CHECK(sojourn_fifo(0.0, 5.0, ServiceDistribution::exponential()) == 0.2);
    CHECK_THROWS_AS(sojourn_fifo(5.0, 5.0, ServiceDistribution::exponential()), UnstableRouting);
  }

  TEST_CASE("unstable splits are rejected") {
    Scenario s = example();
    s.lambda = 6.0;
    CHECK_THROWS_AS(build_profiles(s, RoutingPolicy::all_hbf()), UnstableRouting);
    CHECK_THROWS_AS(build_profiles(s, RoutingPolicy::all_fifo()), UnstableRouting);
    CHECK_NOTHROW(build_profiles(s, RoutingPolicy::two_threshold(2.0, 7.0)));
  }

  TEST_CASE("empty HBF server") {
    const auto split = build_profiles(example(), RoutingPolicy::all_fifo());
    CHECK(split.hbf.empty());
    CHECK(split.hbf.w0 == 0.0);
    CHECK(waiting_time(3.0, split.hbf) == 0.0);
    CHECK(bid(7.0, split.hbf) == 0.0);
  }

  TEST_CASE("bid quadrature matches the type-space oracle") {
    for (WaitVariant v : {WaitVariant::Standard, WaitVariant::Example}) {
      const auto split = build_profiles(example(), RoutingPolicy::two_threshold(1.67, 5.66), v);
      for (double beta : {0.5, 1.67, 3.0, 5.66, 7.5, 10.0}) {
        CAPTURE(beta);
        CHECK(std::abs(bid(beta, split.hbf) - bid_oracle(beta, split.hbf)) <= 1e-9);
      }
    }
  }

  TEST_CASE("frozen bid at the published lower threshold") {
    // Values confirmed by the type-space oracle above and the trapezoid oracle in the reference report.
    const auto ex = build_profiles(example(), RoutingPolicy::two_threshold(1.67, 5.66), WaitVariant::Example);
    const auto st = build_profiles(example(), RoutingPolicy::two_threshold(1.67, 5.66), WaitVariant::Standard);
    CHECK(bid(1.67, ex.hbf) == doctest::Approx(0.0403355).epsilon(1e-6));
    CHECK(bid(1.67, st.hbf) == doctest::Approx(0.0969667).epsilon(1e-6));
  }

  TEST_CASE("bid curve interpolation agrees with direct quadrature") {
    const auto split = build_profiles(example(), RoutingPolicy::two_threshold(3.49, 8.14));
    const BidCurve curve(split.hbf);
    CHECK(curve.error_bound() <= 1e-9);
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double beta = 10.0 * i / 200.0;
      worst = std::max(worst, std::abs(curve(beta) - bid(beta, split.hbf)));
    }
    CHECK(worst <= 1e-9);
    const double mean = simpson([&](double y) { return bid(y, split.hbf) * split.hbf.pdf(y); }, 0.0, 3.49, 400) +
                        simpson([&](double y) { return bid(y, split.hbf) * split.hbf.pdf(y); }, 8.14, 10.0, 400);
    CHECK(curve.mean_bid() == doctest::Approx(mean).epsilon(1e-7));
  }

  TEST_CASE("properties across profiles, services and policy forms") {
    for (const auto& c : property_cases()) {
      CAPTURE(c.name);
      CAPTURE(to_string(c.scenario.profile.kind()));
      CAPTURE(to_string(c.scenario.service.kind()));
      const auto split = build_profiles(c.scenario, c.policy);
      const auto& h = split.hbf;
      const BidCurve x(h);
      const double a = h.lower(), b = h.upper();

      CHECK(std::abs(x(a)) <= 1e-14);
      CHECK(waiting_time(b, h) == doctest::Approx(h.w0).epsilon(1e-12));
      double prev_x = -1.0, prev_w = INFINITY;
      bool x_up = true, w_down = true;
      for (int i = 0; i <= 500; ++i) {
        const double beta = a + (b - a) * i / 500.0;
        const double xv = x(beta), wv = waiting_time(beta, h);
        x_up = x_up && xv >= prev_x - 1e-13;
        w_down = w_down && wv <= prev_w + 1e-13;
        prev_x = xv;
        prev_w = wv;
      }
      CHECK(x_up);
      CHECK(w_down);

      const auto [lo, hi] = c.policy.fifo_interval(c.scenario.profile);
      // Flat gap: no HBF type ranks inside the FIFO interval.
      CHECK(std::abs(x(lo) - x(hi)) <= 1e-10);
      CHECK(waiting_time(lo, h) == doctest::Approx(waiting_time(hi, h)).epsilon(1e-14));

      // F1 quantile inverts F1 on the HBF support.
      for (double u : {0.05, 0.3, 0.6, 0.95}) CHECK(h.cdf(h.quantile(u)) == doctest::Approx(u).epsilon(1e-9));
    }
  }

  TEST_CASE("bid optimality: no HBF type gains by copying another type's bid") {
    for (const auto& c : property_cases()) {
      const auto split = build_profiles(c.scenario, c.policy);
      const auto& h = split.hbf;
      const BidCurve x(h);
      const double a = h.lower(), b = h.upper();
      std::vector<double> grid;
      for (int i = 0; i <= 150; ++i) {
        const double beta = a + (b - a) * i / 150.0;
        if (c.policy.fifo_probability(beta, c.scenario.profile) == 0.0) grid.push_back(beta);
      }
      double worst = 0.0;
      for (double beta : grid) {
        const double own = x(beta) + beta * sojourn_hbf(beta, h);
        for (double other : grid) worst = std::max(worst, own - (x(other) + beta * sojourn_hbf(other, h)));
      }
      CHECK(worst <= 1e-9);
    }
  }

  TEST_CASE("wait variant names") {
    CHECK(parse_wait_variant("eq2") == WaitVariant::Standard);
    CHECK(parse_wait_variant("example") == WaitVariant::Example);
    CHECK(to_string(WaitVariant::Example) == "example");
    CHECK_THROWS_AS(parse_wait_variant("other"), InvalidArgument);
  }
}
