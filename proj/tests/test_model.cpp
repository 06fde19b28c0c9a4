#include "hbfq/error.hpp"
#include "hbfq/model.hpp"
#include "hbfq/quadrature.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace hbfq;

namespace {

std::vector<TypeProfile> all_profiles() {
  return {
      TypeProfile::uniform(0.0, 10.0),
      TypeProfile::uniform(1.5, 4.0),
      TypeProfile::truncated_exponential(0.0, 10.0, 0.3),
      TypeProfile::truncated_exponential(2.0, 3.0, 5.0),
      TypeProfile::piecewise_linear({0.0, 1.0, 4.0, 10.0}, {0.0, 0.5, 0.6, 1.0}),
  };
}

std::vector<ServiceDistribution> all_services() {
  return {
      ServiceDistribution::exponential(),
      ServiceDistribution::deterministic(),
      ServiceDistribution::erlang(2),
      ServiceDistribution::erlang(5),
      ServiceDistribution::hyperexponential(0.3, 2.0),
  };
}

// One-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> xs, const TypeProfile& p) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = p.cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("uniform cdf and quantile at the example thresholds") {
    const auto p = TypeProfile::uniform(0.0, 10.0);
    CHECK(p.cdf(1.67) == doctest::Approx(0.167).epsilon(1e-15));
    CHECK(p.cdf(5.66) == doctest::Approx(0.566).epsilon(1e-15));
    CHECK(p.cdf(0.0) == 0.0);
    CHECK(p.cdf(-3.0) == 0.0);
    CHECK(p.cdf(12.0) == 1.0);
    CHECK(p.quantile(0.5) == 5.0);
    CHECK(p.quantile(0.0) == 0.0);
    CHECK(p.quantile(1.0) == 10.0);
    CHECK_THROWS_AS(p.quantile(-0.1), InvalidArgument);
    CHECK_THROWS_AS(p.quantile(1.1), InvalidArgument);
  }

  TEST_CASE("cdf/quantile round trip on a 1e4 grid") {
    for (const auto& p : all_profiles()) {
      CAPTURE(to_string(p.kind()));
      double worst = 0.0;
      for (int i = 1; i < 10'000; ++i) {
        const double beta = p.lower() + (p.upper() - p.lower()) * i / 10'000.0;
        worst = std::max(worst, std::abs(p.quantile(p.cdf(beta)) - beta));
      }
      CHECK(worst <= 1e-9);
      CHECK(p.cdf(p.lower()) == 0.0);
      CHECK(p.cdf(p.upper()) == 1.0);
    }
  }

  TEST_CASE("pdf integrates to one and cdf is monotone") {
    for (const auto& p : all_profiles()) {
      CAPTURE(to_string(p.kind()));
      double total = 0.0;
      if (p.kind() == TypeProfile::Kind::PiecewiseLinear) {
        const auto k = p.knots();
        for (std::size_t i = 0; i + 1 < k.size(); ++i)
          total += adaptive_simpson([&](double x) { return p.pdf(x); }, k[i], k[i + 1], 1e-13).value;
      } else {
        total = adaptive_simpson([&](double x) { return p.pdf(x); }, p.lower(), p.upper(), 1e-13).value;
      }
      CHECK(std::abs(total - 1.0) <= 1e-9);
      double prev = 0.0;
      for (int i = 0; i <= 1000; ++i) {
        const double f = p.cdf(p.lower() + (p.upper() - p.lower()) * i / 1000.0);
        CHECK(f >= prev);
        prev = f;
      }
    }
  }

  TEST_CASE("profile construction rejects atoms and bad supports") {
    CHECK_THROWS_AS(TypeProfile::uniform(3.0, 3.0), InvalidArgument);
    CHECK_THROWS_AS(TypeProfile::uniform(-1.0, 3.0), InvalidArgument);
    CHECK_THROWS_AS(TypeProfile::uniform(0.0, INFINITY), InvalidArgument);
    CHECK_THROWS_AS(TypeProfile::piecewise_linear({0.0, 1.0, 1.0, 2.0}, {0.0, 0.3, 0.6, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(TypeProfile::piecewise_linear({0.0, 1.0, 2.0}, {0.0, 0.5, 0.9}), InvalidArgument);
    CHECK_THROWS_AS(TypeProfile::piecewise_linear({0.0, 1.0, 2.0}, {0.0, 0.5, 0.5}), InvalidArgument);
    CHECK_THROWS_AS(TypeProfile::truncated_exponential(0.0, 1.0, 0.0), InvalidArgument);
  }

  TEST_CASE("service second moments in closed form") {
    CHECK(ServiceDistribution::exponential().second_moment() == 2.0);
    CHECK(ServiceDistribution::deterministic().second_moment() == 1.0);
    CHECK(ServiceDistribution::erlang(2).second_moment() == doctest::Approx(1.5).epsilon(1e-15));
    for (const auto& s : all_services()) CHECK(s.second_moment() >= 1.0);
    CHECK_THROWS_AS(ServiceDistribution::erlang(0), InvalidArgument);
    CHECK_THROWS_AS(ServiceDistribution::hyperexponential(1.0, 1.0), InvalidArgument);
  }

  TEST_CASE("erlang-2 second moment against 1e7 samples") {
    Rng rng(42);
    const auto s = ServiceDistribution::erlang(2);
    const int n = 10'000'000;
    double m2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = s.sample(rng);
      m2 += x * x;
    }
    m2 /= n;
    // Var(S^2) = E[S^4] - 1.5^2 = 7.5 - 2.25 for unit-mean Erlang-2.
    const double se = std::sqrt(5.25 / n);
    CHECK(std::abs(m2 - 1.5) <= 4.0 * se);
  }

  TEST_CASE("every service kind has unit mean by simulation") {
    for (const auto& s : all_services()) {
      CAPTURE(to_string(s.kind()));
      Rng rng(7);
      const int n = 1'000'000;
      double m1 = 0.0;
      for (int i = 0; i < n; ++i) m1 += s.sample(rng);
      m1 /= n;
      const double se = std::sqrt((s.second_moment() - 1.0) / n);
      CHECK(std::abs(m1 - 1.0) <= std::max(4.0 * se, 1e-12));
    }
  }

  TEST_CASE("sampler CLT bounds from 1e6 draws") {
    Rng rng(2024);
    const auto p = TypeProfile::uniform(0.0, 10.0);
    const auto s = ServiceDistribution::exponential();
    double mean = 0.0, m2 = 0.0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) {
      mean += p.sample(rng);
      const double x = s.sample(rng);
      m2 += x * x;
    }
    CHECK(std::abs(mean / n - 5.0) <= 0.01);
    CHECK(std::abs(m2 / n - 2.0) <= 0.02);
  }

  TEST_CASE("seeded samplers are reproducible") {
    Rng a(99), b(99);
    const auto p = TypeProfile::truncated_exponential(0.0, 10.0, 0.3);
    for (int i = 0; i < 1000; ++i) CHECK(p.sample(a) == p.sample(b));
  }

  TEST_CASE("samplers pass KS at 0.01 with 1e5 samples") {
    const int n = 100'000;
    const double critical = 1.628 / std::sqrt(static_cast<double>(n));
    std::uint64_t seed = 11;
    for (const auto& p : all_profiles()) {
      CAPTURE(to_string(p.kind()));
      Rng rng(seed++);
      std::vector<double> xs(n);
      for (auto& x : xs) x = p.sample(rng);
      CHECK(ks_statistic(xs, p) < critical);
    }
  }

  TEST_CASE("scenario validation") {
    Scenario s;
    s.lambda = 4.0;
    s.mu1 = s.mu2 = 5.0;
    CHECK_NOTHROW(s.validate());
    s.lambda = 10.0;
    CHECK_THROWS_AS(s.validate(), UnstableRouting);
    s.lambda = -1.0;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    s.lambda = 1.0;
    s.price = -0.1;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
  }

  TEST_CASE("routing policy shapes") {
    const auto p = TypeProfile::uniform(0.0, 10.0);
    const auto two = RoutingPolicy::two_threshold(2.0, 6.0, 0.25);
    CHECK(two.fifo_probability(1.0, p) == 0.0);
    CHECK(two.fifo_probability(2.0, p) == 0.25);
    CHECK(two.fifo_probability(4.0, p) == 1.0);
    CHECK(two.fifo_probability(6.0, p) == 0.25);
    CHECK(two.fifo_probability(8.0, p) == 0.0);
    CHECK(two.fifo_mass(p) == doctest::Approx(0.4));

    const auto low = RoutingPolicy::single_low_fifo(3.0);
    CHECK(low.fifo_probability(1.0, p) == 1.0);
    CHECK(low.fifo_probability(5.0, p) == 0.0);
    const auto high = RoutingPolicy::single_high_fifo(3.0);
    CHECK(high.fifo_probability(1.0, p) == 0.0);
    CHECK(high.fifo_probability(5.0, p) == 1.0);

    CHECK(RoutingPolicy::all_fifo().fifo_mass(p) == 1.0);
    CHECK(RoutingPolicy::all_hbf().fifo_mass(p) == 0.0);
    CHECK_THROWS_AS(RoutingPolicy::two_threshold(6.0, 2.0).validate(p), InvalidArgument);
    CHECK_THROWS_AS(RoutingPolicy::single_low_fifo(11.0).validate(p), InvalidArgument);
    CHECK_THROWS_AS(RoutingPolicy::two_threshold(1.0, 2.0, 1.5).validate(p), InvalidArgument);
    CHECK(parse_policy_form("single-low") == PolicyForm::SingleLowFifo);
    CHECK_THROWS_AS(parse_policy_form("three-threshold"), InvalidArgument);
  }
}
