#include <cmath>

#include "doctest.h"
#include "zoblock/diagnostics.hpp"
#include "zoblock/errors.hpp"
#include "zoblock/problems.hpp"

using namespace zoblock;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}
}  // namespace

TEST_CASE("metric names round-trip") {
  for (MetricKind k : {MetricKind::grad_mapping_sq, MetricKind::fw_gap, MetricKind::block_fw_gap,
                       MetricKind::gen_fw_gap, MetricKind::suboptimality,
                       MetricKind::weighted_dist_sq}) {
    CHECK(parse_metric(metric_name(k)) == k);
  }
  CHECK_THROWS_AS(parse_metric("nope"), ConfigError);
}

TEST_CASE("gradient mapping on an unconstrained problem is the gradient") {
  const auto p = make_problem("nonconvex_sigmoid_ls", 6, 2);
  const Vector x = Vector::LinSpaced(6, -1, 2);
  CHECK(grad_mapping_sq(*p, x, 0.7) == doctest::Approx(p->gradient(x).squaredNorm()).epsilon(1e-13));
}

TEST_CASE("analytic gradients match central differences") {
  RngStream rng(81);
  for (const auto& name : problem_catalog()) {
    CAPTURE(name);
    const auto p = make_problem(name, 9, 3);
    for (int t = 0; t < 5; ++t) {
      const Vector x = random_feasible_point(p->geometry(), rng);
      const Vector g = p->gradient(x);
      for (Index i = 0; i < 9; ++i) {
        Vector e = Vector::Zero(9);
        e[i] = 1e-6;
        const double fd = (p->value(x + e) - p->value(x - e)) / 2e-6;
        CHECK(std::abs(fd - g[i]) <= 1e-5);
      }
    }
  }
}

TEST_CASE("Frank-Wolfe gaps") {
  const auto box = make_problem("quadratic", 1, 1, {{"box", 1.0}, {"b_value", 0.0}});
  CHECK(fw_gap(*box, vec({0.5})) == doctest::Approx(0.75));
  CHECK(fw_gap(*box, vec({0.0})) == 0.0);
  CHECK_THROWS_AS(fw_gap(*make_problem("quadratic", 2, 1), vec({0, 0})), ConfigError);

  // The generalized gap over the product equals a brute-force full LMO and
  // is bounded by the sum of block gaps.
  const auto lasso = make_problem("composite_lasso_box", 6, 3, {{"l1", 0.3}});
  RngStream rng(82);
  for (int t = 0; t < 100; ++t) {
    const Vector z = random_feasible_point(lasso->geometry(), rng);
    const Vector g = lasso->gradient(z);
    double best = 0.0;
    for (Index i = 0; i < 6; ++i) {
      double m = INFINITY;
      for (double y : {-1.0, 0.0, 1.0}) m = std::min(m, g[i] * y + 0.3 * std::abs(y));
      best += m;
    }
    const double full = g.dot(z) + lasso->geometry().chi(z) - best;
    double blocks = 0.0;
    for (Index s = 0; s < 3; ++s) blocks += block_gen_fw_gap(*lasso, z, s);
    CHECK(gen_fw_gap(*lasso, z) == doctest::Approx(full).epsilon(1e-12));
    CHECK(full <= blocks + 1e-10);
    CHECK(full >= -1e-10);
    CHECK(fw_gap(*lasso, z) >= -1e-10);
  }
}

TEST_CASE("weighted distance") {
  const BlockLayout l({1, 1});
  CHECK(weighted_dist_sq(l, vec({1, 2}), vec({1, 2}), {0.5, 0.5}) == 0.0);
  CHECK(weighted_dist_sq(l, vec({1, 2}), vec({0, 0}), {0.25, 0.75}) == doctest::Approx(9.0 + 1.0 / 3.0));
  const BlockLayout l3({2, 1, 1});
  const Vector d = vec({1, -1, 2, 0.5});
  CHECK(weighted_dist_sq(l3, d, Vector::Zero(4), {1.0 / 3, 1.0 / 3, 1.0 / 3}) ==
        doctest::Approx(3 * d.squaredNorm()));
  CHECK_THROWS_AS(weighted_dist_sq(l, vec({1, 2}), vec({0, 0}), {1.0, 0.0}), ConfigError);
}

TEST_CASE("failure rates") {
  const FailureRate a = empirical_eps_lambda({0.1, 0.2, 0.3}, 0.25);
  CHECK(a.failures == 1);
  CHECK(a.rate == doctest::Approx(1.0 / 3.0));
  CHECK(empirical_eps_lambda({0.1, 0.2}, 0.25).rate == 0.0);

  RngStream rng(83);
  std::vector<double> draws;
  for (int i = 0; i < 200; ++i) draws.push_back(rng.uniform() < 0.2 ? 1.0 : 0.0);
  const FailureRate r = empirical_eps_lambda(draws, 0.5);
  CHECK(r.ci.lower <= 0.2);
  CHECK(r.ci.upper >= 0.2);
  // Wilson interval for 0 of 10 at 95%: upper = z^2 / (n + z^2).
  const Interval w = wilson_interval(0, 10);
  const double z2 = 1.959963984540054 * 1.959963984540054;
  CHECK(w.lower == doctest::Approx(0.0));
  CHECK(w.upper == doctest::Approx(z2 / (10 + z2)));
}
