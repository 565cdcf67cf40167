#include <cmath>

#include "doctest.h"
#include "zoblock/errors.hpp"
#include "zoblock/zeroth_oracle.hpp"

using namespace zoblock;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}
double half_sq(const Vector& x) { return 0.5 * x.squaredNorm(); }
}  // namespace

TEST_CASE("mu floor") {
  CHECK_THROWS_AS(SmoothedOracle(half_sq, NoiseModel::noiseless(), 1e-9, BlockLayout({2})), ConfigError);
  CHECK_NOTHROW(SmoothedOracle(half_sq, NoiseModel::noiseless(), 1e-8, BlockLayout({2})));
}

TEST_CASE("evaluate counts calls and flags non-finite values") {
  SmoothedOracle o([](const Vector& x) { return x.squaredNorm(); }, NoiseModel::noiseless(), 0.1,
                   BlockLayout({2}));
  CHECK(o.evaluate(vec({1, 2}), RngStream(1)) == 5.0);
  CHECK(o.calls() == 1);
  SmoothedOracle zero_sigma([](const Vector& x) { return x.squaredNorm(); },
                            NoiseModel::gradient_consistent(0.0), 0.1, BlockLayout({2}));
  CHECK(zero_sigma.evaluate(vec({1, 2}), RngStream(1)) == 5.0);
  SmoothedOracle bad([](const Vector&) { return NAN; }, NoiseModel::noiseless(), 0.1, BlockLayout({2}));
  CHECK_THROWS_AS(bad.evaluate(vec({1, 2}), RngStream(1)), NumericalError);
}

TEST_CASE("gradient-consistent noise has variance sigma^2 / n at a unit coordinate") {
  const Index n = 8;
  SmoothedOracle o([](const Vector&) { return 0.0; }, NoiseModel::gradient_consistent(1.0), 0.1,
                   BlockLayout({n}));
  Vector x = Vector::Zero(n);
  x[0] = 1.0;
  const std::size_t N = 100000;
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double v = o.evaluate(x, RngStream(3).child(i));
    s += v;
    s2 += v * v;
  }
  const double var = s2 / N - (s / N) * (s / N);
  CHECK(std::abs(var - 1.0 / n) <= 0.05 / n);
}

TEST_CASE("estimator closed forms") {
  SmoothedOracle linear([](const Vector& x) { return x[0]; }, NoiseModel::noiseless(), 0.37,
                        BlockLayout({2}));
  const Vector g1 = linear.gsmooth_estimate(vec({3, -1}), vec({0.5, 2}), NoiseDraw{});
  CHECK(g1[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(g1[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(linear.calls() == 2);

  SmoothedOracle quad(half_sq, NoiseModel::noiseless(), 0.1, BlockLayout({2}));
  const Vector g2 = quad.gsmooth_estimate(vec({1, 0}), vec({1, 1}), NoiseDraw{});
  CHECK(g2[0] == doctest::Approx(1.1).epsilon(1e-12));
  CHECK(g2[1] == doctest::Approx(1.1).epsilon(1e-12));
}

TEST_CASE("noise is shared between the two evaluations") {
  // Pure additive value noise cancels in the difference quotient.
  SmoothedOracle noisy(half_sq, NoiseModel::additive_gaussian_value(5.0), 0.1, BlockLayout({2}));
  SmoothedOracle clean(half_sq, NoiseModel::noiseless(), 0.1, BlockLayout({2}));
  const RngStream s = RngStream(4).child(9);
  const Vector a = noisy.gsmooth_estimate(vec({1, 2}), s);
  const Vector b = clean.gsmooth_estimate(vec({1, 2}), s);
  CHECK((a - b).norm() <= 1e-9);
}

TEST_CASE("singleton batch equals the block of one estimator") {
  SmoothedOracle o(half_sq, NoiseModel::gradient_consistent(0.3), 0.05, BlockLayout({2, 3}));
  const Vector x = vec({1, -2, 0.5, 3, 1});
  const RngStream step = RngStream(8).child(3).child(1);
  const Vector full = o.gsmooth_estimate(x, step);
  const Vector blk = o.batch_block_estimate(x, 1, 1, step);
  CHECK(blk == full.segment(2, 3));
  CHECK_THROWS_AS(o.batch_block_estimate(x, 1, 0, step), ConfigError);
  o.reset_calls();
  o.batch_block_estimate(x, 0, 7, step);
  CHECK(o.calls() == 14);
  o.batch_full_estimate(x, 5, step);
  CHECK(o.calls() == 24);
}

TEST_CASE("batch estimate of a linear function targets the block gradient") {
  // f = <c, x> with c supported on block 1; the block-0 estimate has mean zero.
  const Vector c = vec({0, 0, 2, -1});
  SmoothedOracle o([c](const Vector& x) { return c.dot(x); }, NoiseModel::noiseless(), 0.2,
                   BlockLayout({2, 2}));
  const Vector x = vec({0.3, 0.1, -0.2, 1});
  const std::size_t N = 20000;
  Vector mean1 = Vector::Zero(2), sq1 = Vector::Zero(2), mean0 = Vector::Zero(2), sq0 = Vector::Zero(2);
  for (std::size_t k = 0; k < N; ++k) {
    const Vector g1 = o.batch_block_estimate(x, 1, 4, RngStream(10).child(k));
    const Vector g0 = o.batch_block_estimate(x, 0, 4, RngStream(11).child(k));
    mean1 += g1;
    sq1 += g1.cwiseProduct(g1);
    mean0 += g0;
    sq0 += g0.cwiseProduct(g0);
  }
  mean1 /= N;
  mean0 /= N;
  for (Index i = 0; i < 2; ++i) {
    const double se1 = std::sqrt((sq1[i] / N - mean1[i] * mean1[i]) / N);
    const double se0 = std::sqrt((sq0[i] / N - mean0[i] * mean0[i]) / N);
    CHECK(std::abs(mean1[i] - c[2 + i]) <= 4 * se1);
    CHECK(std::abs(mean0[i]) <= 4 * se0);
  }
}

TEST_CASE("batch variance scales as one over the batch size") {
  SmoothedOracle o(half_sq, NoiseModel::gradient_consistent(0.5), 0.05, BlockLayout({3, 3}));
  const Vector x = vec({1, 0.5, -1, 2, 0, 1});
  auto variance = [&](std::size_t batch, std::uint64_t tag) {
    const std::size_t N = 4000;
    Vector mean = Vector::Zero(3);
    std::vector<Vector> draws;
    for (std::size_t k = 0; k < N; ++k) {
      draws.push_back(o.batch_block_estimate(x, 0, batch, RngStream(tag).child(k)));
      mean += draws.back();
    }
    mean /= N;
    double v = 0.0;
    for (const auto& d : draws) v += (d - mean).squaredNorm();
    return v / (N - 1);
  };
  const double ratio = variance(16, 1) / variance(64, 2);
  CHECK(ratio >= 4.0 * 0.7);
  CHECK(ratio <= 4.0 * 1.3);
}

TEST_CASE("Monte-Carlo references") {
  // Diagonal quadratic: f_mu - f = mu^2 trace(A) / 2.
  const Vector a = vec({1, 2, 3});
  const double mu = 0.3;
  SmoothedOracle o([a](const Vector& x) { return 0.5 * x.dot(a.cwiseProduct(x)); },
                   NoiseModel::noiseless(), mu, BlockLayout({3}));
  const Vector x = vec({0.5, -1, 2});
  const double f = 0.5 * x.dot(a.cwiseProduct(x));
  const McEstimate v = o.smoothed_value_mc(x, 200000, RngStream(21));
  CHECK(std::abs(v.mean - (f + mu * mu * a.sum() / 2)) <= 4 * v.std_error);

  const Vector c = vec({1, -2, 0.5});
  SmoothedOracle lin([c](const Vector& y) { return c.dot(y); }, NoiseModel::noiseless(), mu,
                     BlockLayout({3}));
  const McVectorEstimate g = lin.smoothed_grad_mc(x, 100000, RngStream(22));
  for (Index i = 0; i < 3; ++i) CHECK(std::abs(g.mean[i] - c[i]) <= 4 * g.std_error[i]);

  // The estimate approaches f(x) as mu shrinks.
  double prev = INFINITY;
  for (double m : {0.3, 0.03, 0.003}) {
    SmoothedOracle om([a](const Vector& y) { return 0.5 * y.dot(a.cwiseProduct(y)); },
                      NoiseModel::noiseless(), m, BlockLayout({3}));
    const double err = std::abs(om.smoothed_value_mc(x, 20000, RngStream(23)).mean - f);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(o.calls() == 0);
}

TEST_CASE("copies keep counts independent and add_calls merges") {
  SmoothedOracle o(half_sq, NoiseModel::noiseless(), 0.1, BlockLayout({2}));
  SmoothedOracle copy(o);
  copy.gsmooth_estimate(vec({1, 1}), RngStream(1));
  CHECK(o.calls() == 0);
  CHECK(copy.calls() == 2);
  o.add_calls(copy.calls());
  CHECK(o.calls() == 2);
}
