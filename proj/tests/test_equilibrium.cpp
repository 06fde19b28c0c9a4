#include "hbfq/equilibrium.hpp"
#include "hbfq/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

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

// Brute-force regret: each type compares FIFO against every HBF bid level on a
// fine grid, using only the evaluation's cost primitives.
double brute_force_regret(const PolicyEvaluation& eval, int n = 400) {
  const auto& p = eval.scenario().profile;
  const double a = p.lower(), b = p.upper();
  double worst = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double beta = a + (b - a) * i / n;
    double best_hbf = INFINITY;
    for (int j = 0; j <= n; ++j) {
      const double y = a + (b - a) * j / n;
      if (eval.policy().fifo_probability(y, p) == 1.0 && eval.hbf().lambda1 > 0.0) continue;
      best_hbf = std::min(best_hbf, eval.payment(y) + beta * eval.d1(y));
    }
    const double fifo = eval.cost_fifo(beta);
    const double q = eval.policy().fifo_probability(beta, p);
    const double own = q == 1.0 ? fifo : eval.cost_hbf(beta);
    worst = std::max(worst, own - std::min(fifo, best_hbf));
  }
  return worst;
}

}  // namespace

TEST_SUITE("equilibrium") {
  TEST_CASE("two-threshold root on the example") {
    const auto out = solve_two_threshold(example());
    REQUIRE(out.status == TwoThresholdStatus::Roots);
    REQUIRE(out.roots.size() == 1);
    const auto& sol = out.roots[0];
    CHECK(sol.kind == SolutionKind::TwoThresholdInterior);
    CHECK(sol.policy.beta1 == doctest::Approx(3.4903874658).epsilon(1e-9));
    CHECK(sol.policy.beta2 == doctest::Approx(8.1364252515).epsilon(1e-9));
    CHECK(sol.max_abs_residual() <= 1e-8);
    CHECK_FALSE(sol.diagnostics.outside_interior);

    const auto eval = sol.evaluation();
    // Conditions: bid at beta1 equals the price, D1(beta1) = D2, and the bid is flat across the FIFO interval.
    CHECK(std::abs(eval.bid(sol.policy.beta1) - 0.2017) <= 1e-8);
    CHECK(std::abs(eval.d1(sol.policy.beta1) - 1.0 / (5.0 - sol.split.fifo.lambda2)) <= 1e-8);
    CHECK(std::abs(eval.bid(sol.policy.beta2) - eval.bid(sol.policy.beta1)) <= 1e-10);
    CHECK(sol.split.fifo.lambda2 == doctest::Approx(4.0 * (sol.policy.beta2 - sol.policy.beta1) / 10.0));

    CHECK(verify_wardrop(eval, 1000).max_regret <= 1e-6);
    CHECK(brute_force_regret(eval) <= 1e-6);
  }

  TEST_CASE("example variant root") {
    TwoThresholdOptions o;
    o.variant = WaitVariant::Example;
    const auto out = solve_two_threshold(example(), o);
    REQUIRE(out.roots.size() == 1);
    CHECK(out.roots[0].policy.beta1 == doctest::Approx(4.1390119899).epsilon(1e-9));
    CHECK(out.roots[0].policy.beta2 == doctest::Approx(7.2375107586).epsilon(1e-9));
  }

  TEST_CASE("published thresholds are not an equilibrium under the standard wait") {
    const auto r = verify_wardrop(example(), RoutingPolicy::two_threshold(1.67, 5.66), 1000);
    CHECK(r.rows.size() == 1000);
    CHECK_FALSE(r.satisfied());
    for (const auto& row : r.rows) {
      CHECK(std::isfinite(row.cost_fifo));
      CHECK(std::isfinite(row.cost_hbf));
    }
  }

  TEST_CASE("all-HBF at a prohibitive price") {
    const auto r = verify_wardrop(example(100.0), RoutingPolicy::all_hbf(), 1000);
    CHECK(r.max_regret <= 1e-12);
    const auto out = solve_two_threshold(example(100.0));
    CHECK(out.status == TwoThresholdStatus::AllHbf);
    CHECK(out.roots.empty());
    REQUIRE(out.all_hbf_max_regret.has_value());
    CHECK(*out.all_hbf_max_regret <= 1e-6);
  }

  TEST_CASE("single-low candidate lists violations") {
    const auto r = verify_wardrop(example(), RoutingPolicy::single_low_fifo(3.0), 1000);
    CHECK_FALSE(r.satisfied());
    CHECK(r.max_regret > 0.1);
    const auto n = std::count_if(r.rows.begin(), r.rows.end(), [&](const WardropRow& w) { return w.regret > 1e-6; });
    CHECK(n > 1);
  }

  TEST_CASE("zero effective price reduces to a one-dimensional solve") {
    const auto out = solve_two_threshold(example(0.0));
    REQUIRE(out.roots.size() == 1);
    const auto& sol = out.roots[0];
    CHECK(sol.kind == SolutionKind::TwoThresholdReduced);
    CHECK(sol.policy.beta1 == 0.0);
    CHECK(sol.policy.beta2 == doctest::Approx(5.640556).epsilon(1e-6));
    CHECK(verify_wardrop(sol.evaluation(), 1000).max_regret <= 1e-6);
  }

  TEST_CASE("two-threshold solver preconditions") {
    Scenario s = example();
    s.mu2 = 4.0;
    CHECK_THROWS_AS(solve_two_threshold(s), InvalidArgument);
    s = example();
    s.min_bid = 0.5;
    CHECK_THROWS_AS(solve_two_threshold(s), InvalidArgument);
  }

  TEST_CASE("single-threshold interior root") {
    Scenario s = example(0.0);
    s.min_bid = 0.1;
    const auto sol = solve_single_threshold(s);
    CHECK(sol.kind == SolutionKind::SingleThresholdInterior);
    CHECK(sol.policy.beta1 == doctest::Approx(5.7736430373).epsilon(1e-9));
    CHECK(std::abs(single_threshold_residual(s, sol.policy.beta1)) <= 1e-10);
    CHECK(sol.diagnostics.sign_changes == 1);
    CHECK(verify_wardrop(sol.evaluation(), 1000).max_regret <= 1e-6);
  }

  TEST_CASE("single-threshold boundaries") {
    Scenario lower;
    lower.lambda = 0.9;
    lower.mu1 = 8.0;
    lower.mu2 = 2.0;
    lower.min_bid = 0.1;
    lower.profile = TypeProfile::uniform(1.0, 10.0);
    const auto lo = solve_single_threshold(lower);
    CHECK(lo.kind == SolutionKind::SingleThresholdLower);
    CHECK(lo.policy.beta1 == 1.0);
    CHECK(verify_wardrop(lo.evaluation(), 500).max_regret <= 1e-9);

    Scenario upper = lower;
    upper.mu1 = 1.0;
    upper.min_bid = 1.0;
    upper.profile = TypeProfile::uniform(0.0, 10.0);
    const auto hi = solve_single_threshold(upper);
    CHECK(hi.kind == SolutionKind::SingleThresholdUpper);
    CHECK(hi.policy.beta1 == 10.0);
    CHECK(verify_wardrop(hi.evaluation(), 500).max_regret <= 1e-9);

    CHECK_THROWS_AS(solve_single_threshold(example()), InvalidArgument);
  }

  TEST_CASE("single-threshold refuters reject every interior candidate") {
    const Scenario s = example();
    for (int i = 1; i <= 20; ++i) {
      const double beta1 = 10.0 * i / 21.0;
      CAPTURE(beta1);
      const auto low = refute_low_fifo_threshold(s, beta1);
      const auto high = refute_high_fifo_threshold(s, beta1);
      REQUIRE(low.refuted());
      REQUIRE(high.refuted());
      CHECK(low.witness->advantage > 0.0);
      CHECK(high.witness->advantage > 0.0);
      CHECK(low.witness->advantage == doctest::Approx(low.witness->cost_prescribed - low.witness->cost_deviation));
      if (low.witness->basis == WitnessBasis::CalibratedPrice)
        CHECK(low.witness->advantage == doctest::Approx(low.calibrated_advantage(low.witness->beta)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(refute_low_fifo_threshold(example(0.0), 3.0), InvalidArgument);
    CHECK_THROWS_AS(refute_high_fifo_threshold(s, 10.0), InvalidArgument);
  }

  TEST_CASE("two-threshold branch ends in an isolated high-FIFO equilibrium") {
    // With D1(beta1) = W0 + 1/mu = D2 and X(beta1) = c, the top-bid deviation is exactly break-even.
    // For mu = 5, lambda = 4 this pins lambda2 = 7 - sqrt(29).
    const Scenario s = example();
    const double lambda2 = 7.0 - std::sqrt(29.0);
    const double beta1 = 10.0 - 2.5 * lambda2;
    const PolicyEvaluation probe(s, RoutingPolicy::single_high_fifo(beta1));
    CHECK(probe.d1(beta1) == doctest::Approx(probe.d2()).epsilon(1e-13));
    const double c_star = probe.bid(beta1);
    CHECK(verify_wardrop(s.with_price(c_star), RoutingPolicy::single_high_fifo(beta1), 2000).max_regret <= 1e-12);
    const auto check = refute_high_fifo_threshold(s.with_price(c_star), beta1);
    CHECK_FALSE(check.refuted());

    const auto out = solve_two_threshold(s.with_price(c_star));
    REQUIRE(out.roots.size() == 1);
    CHECK(out.roots[0].policy.beta1 == doctest::Approx(beta1).epsilon(1e-6));
    CHECK(out.roots[0].diagnostics.outside_interior);
  }

  TEST_CASE("revenue") {
    const auto out = solve_two_threshold(example());
    const auto rev = revenue(out.roots[0]);
    CHECK(rev.fifo == doctest::Approx(0.2017 * out.roots[0].split.fifo.lambda2).epsilon(1e-14));
    CHECK(rev.fifo == doctest::Approx(0.374842).epsilon(1e-5));
    CHECK(rev.hbf == doctest::Approx(0.378025).epsilon(1e-5));
    CHECK(rev.total() == doctest::Approx(rev.fifo + rev.hbf));
  }

  TEST_CASE("price sweep") {
    const auto prices = linear_grid(0.0, 2.0, 41);
    REQUIRE(prices.size() == 41);
    CHECK(prices.front() == 0.0);
    CHECK(prices.back() == 2.0);
    const auto table = sweep_admission_price(example(), prices);
    REQUIRE(table.rows.size() == 41);
    REQUIRE(table.argmax_total.has_value());
    for (const auto& r : table.rows)
      if (r.has_equilibrium()) CHECK(r.revenue.total() <= table.rows[*table.argmax_total].revenue.total());
    // Past the end of the two-threshold branch no threshold equilibrium exists; the sweep keeps going.
    CHECK(table.rows[10].status == TwoThresholdStatus::Roots);
    CHECK(table.rows[11].status == TwoThresholdStatus::NoEquilibrium);
    CHECK(table.rows.back().status == TwoThresholdStatus::NoEquilibrium);
    CHECK(table.rows.back().price == 2.0);

    const double one[] = {0.2017};
    const auto single = sweep_admission_price(example(), one);
    const auto direct = solve_two_threshold(example());
    CHECK(single.rows[0].beta1 == direct.roots[0].policy.beta1);
    CHECK(single.rows[0].beta2 == direct.roots[0].policy.beta2);
  }
}
