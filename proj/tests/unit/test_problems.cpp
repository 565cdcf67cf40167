#include <cmath>

#include "doctest.h"
#include "zoblock/diagnostics.hpp"
#include "zoblock/errors.hpp"
#include "zoblock/problems.hpp"

using namespace zoblock;

TEST_CASE("catalog") {
  CHECK(problem_catalog() == std::vector<std::string>{"quadratic", "nonconvex_sigmoid_ls",
                                                       "composite_lasso_box", "simplex_entropy"});
  CHECK_THROWS_AS(make_problem("rosenbrock", 4, 2), ConfigError);
  CHECK_THROWS_AS(make_problem("quadratic", 4, 2, {{"bogus", 1.0}}), ConfigError);
}

TEST_CASE("quadratic with unit curvature") {
  const auto p = make_problem("quadratic", 6, 3, {{"seed", 4}});
  for (double L : p->block_lipschitz()) CHECK(L == 1.0);
  CHECK(p->lipschitz() == 1.0);
  const Vector x_star = *p->minimizer();
  // x* is the linear term itself and f* = -||b||^2 / 2.
  const Vector b = p->gradient(Vector::Zero(6)) * -1.0;
  CHECK((x_star - b).norm() == 0.0);
  CHECK(*p->optimal_value() == doctest::Approx(-0.5 * b.squaredNorm()).epsilon(1e-14));
  CHECK(p->value(x_star) == doctest::Approx(*p->optimal_value()).epsilon(1e-14));
  CHECK(p->convex());
  CHECK(!p->gradient_bound());
}

TEST_CASE("quadratic block constants follow the diagonal") {
  const auto p = make_problem("quadratic", 6, 2, {{"a_min", 1.0}, {"a_max", 3.5}});
  CHECK(p->block_lipschitz()[0] == doctest::Approx(2.0));
  CHECK(p->block_lipschitz()[1] == doctest::Approx(3.5));
  CHECK(p->lipschitz() == doctest::Approx(3.5));
  const Vector x = Vector::LinSpaced(6, -1, 1);
  CHECK(*p->smoothed_value(x, 0.2) - p->value(x) ==
        doctest::Approx(0.04 * Vector::LinSpaced(6, 1.0, 3.5).sum() / 2).epsilon(1e-12));
}

TEST_CASE("sigmoid least squares with a zero matrix") {
  for (const char* name : {"nonconvex_sigmoid_ls", "composite_lasso_box"}) {
    CAPTURE(name);
    const auto p = make_problem(name, 5, 1, {{"a_scale", 0.0}, {"lambda", 0.3}});
    CHECK(*p->optimal_value() == 0.0);
    CHECK(p->minimizer()->norm() == 0.0);
    Vector x = Vector::Constant(5, 0.5);
    CHECK(p->value(x) == doctest::Approx(0.3 * 5 * 0.25 / 1.25));
    CHECK(p->lipschitz() == doctest::Approx(0.6));
  }
}

TEST_CASE("declared constants pass the random-pair audit") {
  const std::vector<std::pair<std::string, ParamMap>> cases{
      {"quadratic", {{"a_min", 0.5}, {"a_max", 4.0}}},
      {"quadratic", {{"box", 1.5}}},
      {"nonconvex_sigmoid_ls", {{"lambda", 0.5}}},
      {"nonconvex_sigmoid_ls", {{"box", 2.0}, {"rows", 12}}},
      {"composite_lasso_box", {}},
      {"simplex_entropy", {}},
      {"simplex_entropy", {{"scale", 0.5}}},
  };
  for (const auto& [name, params] : cases) {
    CAPTURE(name);
    const auto p = make_problem(name, 12, 3, params);
    const AuditReport r = audit_constants(*p, RngStream(71), 1000);
    CHECK(r.passed());
    CHECK(r.worst_block_ratio > 0.0);
  }
}

TEST_CASE("declared minimizers are stationary") {
  const std::vector<std::pair<std::string, ParamMap>> cases{
      {"quadratic", {{"a_min", 0.5}, {"a_max", 4.0}}},
      {"quadratic", {{"box", 0.3}}},
      {"simplex_entropy", {}},
      {"nonconvex_sigmoid_ls", {{"a_scale", 0.0}}},
      {"composite_lasso_box", {{"a_scale", 0.0}}},
  };
  for (const auto& [name, params] : cases) {
    CAPTURE(name);
    const auto p = make_problem(name, 12, 3, params);
    const Vector x_star = *p->minimizer();
    CHECK(p->geometry().contains(x_star, 1e-10));
    CHECK(grad_mapping_sq(*p, x_star, 1.0 / p->lipschitz_max()) <= 1e-8);
    CHECK(p->composite_value(x_star) == doctest::Approx(*p->optimal_value()).epsilon(1e-12));
  }
}

TEST_CASE("default starts are feasible") {
  for (const auto& name : problem_catalog()) {
    const auto p = make_problem(name, 9, 3);
    CHECK(p->geometry().contains(p->default_start(), 1e-12));
    CHECK(p->optimal_value_lower_bound().has_value());
  }
}

TEST_CASE("construction is reproducible") {
  const auto a = make_problem("nonconvex_sigmoid_ls", 8, 2, {{"seed", 3}});
  const auto b = make_problem("nonconvex_sigmoid_ls", 8, 2, {{"seed", 3}});
  const auto c = make_problem("nonconvex_sigmoid_ls", 8, 2, {{"seed", 4}});
  const Vector x = Vector::LinSpaced(8, -1, 1);
  CHECK(a->value(x) == b->value(x));
  CHECK(a->value(x) != c->value(x));
}
