#include <doctest.h>

#include <cmath>

#include "zoblock/bounds.hpp"
#include "zoblock/diagnostics.hpp"
#include "zoblock/errors.hpp"
#include "zoblock/problems.hpp"
#include "zoblock/solvers.hpp"

using namespace zoblock;

namespace {

SolverConfig config_for(const TestProblem& p, Algorithm algo, std::size_t T, double alpha,
                        std::size_t batch, std::uint64_t seed) {
  return SolverConfig::constant(algo, T, alpha, batch, p.num_blocks(), p.block_lipschitz(),
                                p.lipschitz(), seed);
}

ProblemPtr unconstrained_quadratic(Index n, Index b) {
  return make_problem("quadratic", n, b, {{"a_min", 1.0}, {"a_max", 3.0}, {"sigma", 0.1}});
}

ProblemPtr box_quadratic(Index n, Index b, double box = 1.0) {
  return make_problem("quadratic", n, b,
                      {{"a_min", 1.0}, {"a_max", 3.0}, {"box", box}, {"sigma", 0.1}});
}

double bcd_alpha_limit(const TestProblem& p) {
  const double b = static_cast<double>(p.num_blocks());
  return (1.0 / b) / (2.0 * p.lipschitz_max() / b * (static_cast<double>(p.dimension()) + 4.0));
}

}  // namespace

TEST_CASE("algorithm names round-trip") {
  for (const auto& name : algorithm_catalog()) CHECK(algorithm_name(parse_algorithm(name)) == name);
  CHECK_THROWS_AS(parse_algorithm("zs_sgd"), ConfigError);
}

TEST_CASE("output weights") {
  auto p = box_quadratic(6, 2);
  SolverConfig c = config_for(*p, Algorithm::zs_bmd, 8, 0.1, 1, 0);
  for (double w : output_weights(c, 6).weights) CHECK(w == doctest::Approx(1.0 / 8));

  c = config_for(*p, Algorithm::zs_bccg_smooth, 2, 0.1, 1, 0);
  c.stepsizes = {0.1, 0.3};
  auto d = output_weights(c, 6);
  CHECK(d.weights[0] == doctest::Approx(0.25));
  CHECK(d.weights[1] == doctest::Approx(0.75));

  // At the boundary every ZS-BCD weight is zero.
  auto u = unconstrained_quadratic(6, 2);
  c = config_for(*u, Algorithm::zs_bcd, 4, bcd_alpha_limit(*u), 1, 0);
  CHECK_THROWS_AS(output_weights(c, 6), AdmissibilityError);
  CHECK_THROWS_AS(normalize_weights({0.5, -0.1}, "test"), AdmissibilityError);

  c = config_for(*p, Algorithm::zs_bmd, 3, 0.1, 1, 0);
  c.stepsizes = {0.1, 0.2, 0.4};
  d = output_weights(c, 6);
  std::vector<double> raw;
  for (double a : c.stepsizes) raw.push_back(a * 0.5 * (1.0 - p->lipschitz_max() / 2.0 * a));
  const double total = raw[0] + raw[1] + raw[2];
  for (int k = 0; k < 3; ++k) CHECK(d.weights[k] == doctest::Approx(raw[k] / total));
}

TEST_CASE("output index frequencies follow the weights") {
  OutputDistribution d{{0.25, 0.75}};
  RngStream rng(17);
  const int draws = 40000;
  int first = 0;
  for (int i = 0; i < draws; ++i) {
    const auto k = sample_output_index(d, rng);
    REQUIRE((k == 1 || k == 2));
    first += k == 1;
  }
  CHECK(static_cast<double>(first) / draws == doctest::Approx(0.25).epsilon(0.04));

  OutputDistribution zero_tail{{0.0, 1.0, 0.0}};
  for (int i = 0; i < 200; ++i) CHECK(sample_output_index(zero_tail, rng) == 2);
}

TEST_CASE("single-block zs_bcd matches a direct loop") {
  auto p = unconstrained_quadratic(5, 1);
  const auto oracle = p->make_oracle(1e-3);
  const double alpha = 0.5 * bcd_alpha_limit(*p);
  const std::uint64_t seed = 99;
  SolverConfig c = config_for(*p, Algorithm::zs_bcd, 30, alpha, 1, seed);
  RunReport r = zs_bcd(oracle, p->default_start(), c);

  Vector x = p->default_start();
  const RngStream steps = RngStream(seed).child(kSampleStream);
  for (std::size_t k = 1; k <= 30; ++k) {
    x -= alpha * oracle.gsmooth_estimate(x, steps.child(k));
    CHECK((r.iterate(k + 1) - x).norm() == 0.0);
  }
  CHECK(r.oracle_calls == 60);
}

TEST_CASE("zs_bmd with Euclidean unconstrained blocks reduces to zs_bcd") {
  auto p = unconstrained_quadratic(8, 4);
  const auto oracle = p->make_oracle(1e-3);
  const double alpha = 0.5 * bcd_alpha_limit(*p);
  auto bcd = zs_bcd(oracle, p->default_start(), config_for(*p, Algorithm::zs_bcd, 40, alpha, 1, 5));
  auto bmd = zs_bmd(oracle, p->geometry(), p->default_start(),
                    config_for(*p, Algorithm::zs_bmd, 40, alpha, 1, 5));
  CHECK(bcd.blocks == bmd.blocks);
  for (std::size_t j = 1; j <= 41; ++j) CHECK((bcd.iterate(j) - bmd.iterate(j)).norm() == 0.0);
}

TEST_CASE("each step changes only the drawn block") {
  auto p = box_quadratic(12, 4);
  const auto oracle = p->make_oracle(1e-3);
  for (Algorithm algo : {Algorithm::zs_bmd, Algorithm::zs_bccg_smooth, Algorithm::zs_bccg_approx}) {
    CAPTURE(algorithm_name(algo));
    SolverConfig c = config_for(*p, algo, 25, algo == Algorithm::zs_bccg_smooth ? 0.2 : 0.5 / p->lipschitz_max(), 3, 8);
    if (algo == Algorithm::zs_bccg_approx) c.deltas.assign(25, 1e-6);
    RunReport r = solve(oracle, p->geometry(), p->default_start(), c);
    const BlockLayout& layout = p->layout();
    for (std::size_t k = 1; k <= 25; ++k) {
      const Vector diff = r.iterate(k + 1) - r.iterate(k);
      for (Index s = 0; s < layout.num_blocks(); ++s) {
        if (s != r.blocks[k - 1]) CHECK(block_norm(layout, diff, s) == 0.0);
      }
    }
  }
}

TEST_CASE("iterates stay feasible and calls are accounted") {
  auto simplex = make_problem("simplex_entropy", 9, 3);
  auto lasso = make_problem("composite_lasso_box", 8, 2);
  struct Case {
    ProblemPtr p;
    Algorithm algo;
    double alpha;  // relative to 1 / L_hat for zs_bmd and zs_bccg_approx
  };
  for (const Case& cs : {Case{simplex, Algorithm::zs_bmd, 1.0}, Case{simplex, Algorithm::zs_bccg_approx, 0.5},
                         Case{simplex, Algorithm::zs_bccg_smooth, 0.1},
                         Case{lasso, Algorithm::zs_bmd, 1.0}, Case{lasso, Algorithm::zs_bccg_composite, 0.1}}) {
    CAPTURE(cs.p->name());
    CAPTURE(algorithm_name(cs.algo));
    auto oracle = cs.p->make_oracle(1e-3);
    const bool prox = cs.algo == Algorithm::zs_bmd || cs.algo == Algorithm::zs_bccg_approx;
    SolverConfig c = config_for(*cs.p, cs.algo, 30, prox ? cs.alpha / cs.p->lipschitz_max() : cs.alpha, 2, 3);
    c.batch_sizes[4] = 7;
    if (cs.algo == Algorithm::zs_bccg_approx) c.deltas.assign(30, 1e-5);
    RunReport r = solve(oracle, cs.p->geometry(), cs.p->default_start(), c);
    for (const Vector& x : r.trajectory) CHECK(cs.p->geometry().contains(x, 1e-9));
    CHECK(r.oracle_calls == 2 * (29 * 2 + 7));
    CHECK(oracle.calls() == r.oracle_calls);
    CHECK(r.cumulative_calls.back() == r.oracle_calls);
    CHECK(r.cumulative_calls[4] == 2 * (4 * 2 + 7));
    CHECK(r.R >= 1);
    CHECK(r.R <= 30);
    CHECK((r.x_R - r.iterate(r.R)).norm() == 0.0);
    CHECK(r.alpha_R == c.stepsizes[r.R - 1]);
  }
}

TEST_CASE("runs are deterministic in the seed") {
  auto p = make_problem("nonconvex_sigmoid_ls", 10, 5, {{"box", 2.0}});
  auto oracle = p->make_oracle(1e-3);
  auto c = config_for(*p, Algorithm::zs_bmd, 50, 0.5 / p->lipschitz_max(), 2, 11);
  auto a = solve(oracle, p->geometry(), p->default_start(), c);
  auto b = solve(oracle, p->geometry(), p->default_start(), c);
  CHECK(a.R == b.R);
  CHECK(a.blocks == b.blocks);
  for (std::size_t j = 0; j < a.trajectory.size(); ++j) CHECK((a.trajectory[j] - b.trajectory[j]).norm() == 0.0);
  c.seed = 12;
  auto d = solve(oracle, p->geometry(), p->default_start(), c);
  CHECK((d.trajectory.back() - a.trajectory.back()).norm() > 0.0);
}

TEST_CASE("conditional gradient stepsize extremes") {
  auto p = box_quadratic(6, 1, 0.5);
  auto oracle = p->make_oracle(1e-3);
  SolverConfig c = config_for(*p, Algorithm::zs_bccg_smooth, 3, 0.0, 2, 4);
  c.stepsizes = {1.0, 0.0, 0.0};
  RunReport r = zs_bccg_smooth(oracle, p->geometry(), p->default_start(), c);
  CHECK(r.R == 1);
  for (Index i = 0; i < 6; ++i) CHECK(std::abs(r.iterate(2)[i]) == doctest::Approx(0.5));
  CHECK((r.iterate(3) - r.iterate(2)).norm() == 0.0);
  CHECK((r.iterate(4) - r.iterate(2)).norm() == 0.0);

  c.stepsizes = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(zs_bccg_smooth(oracle, p->geometry(), p->default_start(), c), AdmissibilityError);
}

TEST_CASE("composite conditional gradient with chi = 0 equals the smooth variant") {
  auto p = box_quadratic(8, 2);
  auto oracle = p->make_oracle(1e-3);
  auto smooth = config_for(*p, Algorithm::zs_bccg_smooth, 20, 0.2, 3, 21);
  auto comp = smooth;
  comp.algo = Algorithm::zs_bccg_composite;
  auto a = solve(oracle, p->geometry(), p->default_start(), smooth);
  auto b = solve(oracle, p->geometry(), p->default_start(), comp);
  for (std::size_t j = 0; j < a.trajectory.size(); ++j) CHECK((a.trajectory[j] - b.trajectory[j]).norm() == 0.0);
}

TEST_CASE("a dominant l1 weight contracts the iterate geometrically") {
  auto p = make_problem("composite_lasso_box", 6, 1, {{"l1", 1e6}, {"sigma", 0.0}});
  auto oracle = p->make_oracle(1e-4);
  auto c = config_for(*p, Algorithm::zs_bccg_composite, 5, 0.1, 1, 2);
  c.stepsizes = {0.1, 0.2, 0.3, 0.4, 0.5};
  auto r = solve(oracle, p->geometry(), p->default_start(), c);
  double factor = 1.0;
  for (double a : c.stepsizes) factor *= 1.0 - a;
  CHECK((r.iterate(6) - factor * p->default_start()).norm() < 1e-12);
}

TEST_CASE("approximate prox tolerance") {
  auto p = box_quadratic(6, 2);
  auto oracle = p->make_oracle(1e-3);
  const double alpha = 0.5 / p->lipschitz_max();
  auto c = config_for(*p, Algorithm::zs_bccg_approx, 10, alpha, 2, 6);
  c.deltas.assign(10, 1e9);
  auto frozen = solve(oracle, p->geometry(), p->default_start(), c);
  for (const Vector& x : frozen.trajectory) CHECK((x - p->default_start()).norm() == 0.0);
  for (std::size_t t : frozen.inner_iterations) CHECK(t == 1);

  // One step with a small delta lands within sqrt(alpha delta) of the exact prox step.
  const double delta = 1e-6;
  auto approx = config_for(*p, Algorithm::zs_bccg_approx, 1, alpha, 2, 6);
  approx.deltas = {delta};
  auto exact = config_for(*p, Algorithm::zs_bmd, 1, alpha, 2, 6);
  auto ra = solve(oracle, p->geometry(), p->default_start(), approx);
  auto rb = solve(oracle, p->geometry(), p->default_start(), exact);
  CHECK((ra.iterate(2) - rb.iterate(2)).squaredNorm() <= alpha * delta);

  approx.deltas = {1e-300};
  approx.max_inner = 1;
  CHECK_THROWS_WITH_AS(solve(oracle, p->geometry(), p->default_start(), approx),
                       doctest::Contains("step 1"), NonTerminationError);
}

TEST_CASE("inadmissible configurations fail before any oracle call") {
  auto p = box_quadratic(6, 2);
  auto oracle = p->make_oracle(1e-3);
  auto c = config_for(*p, Algorithm::zs_bmd, 10, 3.0 / p->lipschitz_max(), 1, 0);
  CHECK_THROWS_WITH_AS(solve(oracle, p->geometry(), p->default_start(), c),
                       doctest::Contains("alpha_k <= 2 / L_s"), AdmissibilityError);
  c.algo = Algorithm::zs_bccg_approx;
  c.deltas.assign(10, 0.1);
  c.stepsizes.assign(10, 1.5 / p->lipschitz_max());
  CHECK_THROWS_WITH_AS(solve(oracle, p->geometry(), p->default_start(), c),
                       doctest::Contains("1 / L_s"), AdmissibilityError);
  c.algo = Algorithm::zs_bccg_smooth;
  c.stepsizes.assign(10, 1.5);
  CHECK_THROWS_AS(solve(oracle, p->geometry(), p->default_start(), c), AdmissibilityError);

  auto u = unconstrained_quadratic(6, 2);
  auto uo = u->make_oracle(1e-3);
  auto bcd = config_for(*u, Algorithm::zs_bcd, 10, 2.0 * bcd_alpha_limit(*u), 1, 0);
  CHECK_THROWS_WITH_AS(zs_bcd(uo, u->default_start(), bcd), doctest::Contains("2 max_s{p_s L_s} (n+4)"),
                       AdmissibilityError);
  CHECK(oracle.calls() == 0);
  CHECK(uo.calls() == 0);
}

TEST_CASE("configuration errors") {
  auto p = box_quadratic(6, 2);
  auto oracle = p->make_oracle(1e-3);
  auto c = config_for(*p, Algorithm::zs_bcd, 5, 1e-3, 1, 0);
  CHECK_THROWS_AS(solve(oracle, p->geometry(), p->default_start(), c), ConfigError);

  auto u = unconstrained_quadratic(6, 2);
  auto uo = u->make_oracle(1e-3);
  auto cg = config_for(*u, Algorithm::zs_bccg_smooth, 5, 0.1, 1, 0);
  CHECK_THROWS_WITH_AS(solve(uo, u->geometry(), u->default_start(), cg), doctest::Contains("bounded"),
                       ConfigError);

  auto bmd = config_for(*p, Algorithm::zs_bmd, 5, 0.1, 1, 0);
  Vector outside = Vector::Constant(6, 2.0);
  CHECK_THROWS_WITH_AS(solve(oracle, p->geometry(), outside, bmd), doctest::Contains("infeasible"),
                       ConfigError);
  bmd.block_probs = {0.7, 0.7};
  CHECK_THROWS_AS(solve(oracle, p->geometry(), p->default_start(), bmd), ConfigError);
  bmd.block_probs = {1.0, 0.0};
  CHECK_THROWS_AS(solve(oracle, p->geometry(), p->default_start(), bmd), ConfigError);
  bmd = config_for(*p, Algorithm::zs_bmd, 5, 0.1, 1, 0);
  bmd.batch_sizes.pop_back();
  CHECK_THROWS_AS(solve(oracle, p->geometry(), p->default_start(), bmd), ConfigError);
  auto approx = config_for(*p, Algorithm::zs_bccg_approx, 5, 0.1, 1, 0);
  CHECK_THROWS_WITH_AS(solve(oracle, p->geometry(), p->default_start(), approx),
                       doctest::Contains("deltas"), ConfigError);
  CHECK(oracle.calls() == 0);
}

TEST_CASE("non-block-Lipschitz objectives diverge with a clean error") {
  const BlockLayout layout = BlockLayout::uniform(4, 2);
  Objective f = [](const Vector& x) { return -x.squaredNorm(); };
  SmoothedOracle oracle(f, NoiseModel::noiseless(), 1e-3, layout);
  // Declared constants far below the true curvature let the stepsize through.
  auto c = SolverConfig::constant(Algorithm::zs_bcd, 200, 50.0, 1, 2, {1e-3, 1e-3}, 1e-3, 1);
  CHECK_THROWS_AS(zs_bcd(oracle, Vector::Ones(4), c), DivergenceError);
}

TEST_CASE("a constant objective leaves the iterate unchanged") {
  const BlockLayout layout = BlockLayout::uniform(4, 2);
  SmoothedOracle oracle([](const Vector&) { return 3.0; }, NoiseModel::noiseless(), 1e-3, layout);
  auto c = SolverConfig::constant(Algorithm::zs_bcd, 20, 0.01, 1, 2, {1.0, 1.0}, 1.0, 1);
  auto r = zs_bcd(oracle, Vector::Ones(4), c);
  for (const Vector& x : r.trajectory) CHECK((x - Vector::Ones(4)).norm() == 0.0);
}

TEST_CASE("long runs store a thinned trajectory") {
  auto p = box_quadratic(4, 2);
  auto oracle = p->make_oracle(1e-3);
  auto c = config_for(*p, Algorithm::zs_bmd, 50, 0.1, 1, 3);
  c.full_trajectory_limit = 10;
  auto r = solve(oracle, p->geometry(), p->default_start(), c);
  CHECK(r.iterate_index.front() == 1);
  CHECK_NOTHROW(r.iterate(r.R));
  CHECK(r.blocks.size() == 50);

  c.iterations = 30000;
  c.stepsizes.assign(30000, 0.1);
  c.batch_sizes.assign(30000, 1);
  auto longer = solve(oracle, p->geometry(), p->default_start(), c);
  CHECK(longer.trajectory.size() <= 10002);
  CHECK_NOTHROW(longer.iterate(4));
  CHECK_THROWS_AS(longer.iterate(2), IndexError);
}

TEST_CASE("record_metrics evaluates every stored iterate") {
  auto p = box_quadratic(6, 3);
  auto oracle = p->make_oracle(1e-3);
  auto c = config_for(*p, Algorithm::zs_bmd, 12, 0.2, 2, 9);
  auto r = solve(oracle, p->geometry(), p->default_start(), c);
  record_metrics(r, *p, {MetricKind::grad_mapping_sq, MetricKind::suboptimality}, c);
  const auto& gm = r.metrics.at("grad_mapping_sq");
  REQUIRE(gm.size() == r.trajectory.size());
  CHECK(gm[0] == doctest::Approx(grad_mapping_sq(*p, r.trajectory[0], 0.2)));
  CHECK(r.metrics.at("suboptimality").back() == doctest::Approx(suboptimality(*p, r.trajectory.back())));
}

TEST_CASE("desk composite problem stays under the conditional gradient bounds") {
  auto p = make_problem("composite_lasso_box", 12, 3, {{"sigma", 0.5}});
  const double gap = p->composite_value(p->default_start()) - *p->optimal_value_lower_bound();
  const double D_Phi = distance_D_Phi(gap, p->lipschitz_max());
  const std::size_t T = 40, Tp = 40;
  const double mu = D_Phi / 16.0 * std::sqrt(1.0 / (T * Tp));
  auto oracle = p->make_oracle(mu, 0.5);

  BoundInputs in;
  in.n = 12;
  in.b = 3;
  in.T = T;
  in.T_batch = Tp;
  in.mu = mu;
  in.sigma = 0.5;
  in.M = *p->gradient_bound();
  in.L_f = p->lipschitz();
  in.L_hat = p->lipschitz_max();
  in.L_check = p->lipschitz_min();
  in.D_Phi = D_Phi;
  in.gap = gap;

  auto approx = config_for(*p, Algorithm::zs_bccg_approx, T, 0.5 / p->lipschitz_max(), Tp, 0);
  approx.deltas.assign(T, 1.0 / (3.0 * T));
  auto comp = config_for(*p, Algorithm::zs_bccg_composite, T, 1.0 / std::sqrt(double(T)), Tp, 0);
  double mapping = 0.0, fw = 0.0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    approx.seed = comp.seed = 500 + seed;
    auto ra = solve(oracle, p->geometry(), p->default_start(), approx);
    mapping += grad_mapping_sq(*p, ra.x_R, ra.alpha_R) / 30.0;
    auto rc = solve(oracle, p->geometry(), p->default_start(), comp);
    fw += gen_fw_gap(*p, rc.x_R) / 30.0;
  }
  CHECK(mapping <= bound_rhs("zs_bccg_approx_uniform", in));

  in.probs = comp.block_probs;
  in.block_lipschitz = p->block_lipschitz();
  in.block_diameters = p->geometry().diameters();
  in.alphas = comp.stepsizes;
  in.batches.assign(T, double(Tp));
  CHECK(fw <= bound_rhs("zs_bccg_composite_gap", in));
}

TEST_CASE("point-mass and uniform output distributions") {
  RngStream rng(23);
  OutputDistribution point{{0.0, 0.0, 1.0, 0.0}};
  for (int i = 0; i < 100; ++i) CHECK(sample_output_index(point, rng) == 3);
  OutputDistribution uniform{{0.25, 0.25, 0.25, 0.25}};
  const int draws = 100000;
  std::vector<int> counts(4, 0);
  for (int i = 0; i < draws; ++i) ++counts[sample_output_index(uniform, rng) - 1];
  const double se = std::sqrt(0.25 * 0.75 / draws);
  for (int c : counts) CHECK(std::abs(double(c) / draws - 0.25) <= 4.0 * se);
}
