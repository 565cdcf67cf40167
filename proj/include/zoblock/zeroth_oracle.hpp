#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>

#include "zoblock/block_space.hpp"
#include "zoblock/rng.hpp"

namespace zoblock {

using Objective = std::function<double(const Vector&)>;

inline constexpr double kMuFloor = 1e-8;

struct NoiseModel {
  enum class Kind { noiseless, additive_gaussian_value, gradient_consistent };

  Kind kind = Kind::noiseless;
  double sigma = 0.0;

  static NoiseModel noiseless() { return {}; }
  // F(x, xi) = f(x) + sigma_v * xi with scalar xi ~ N(0, 1).
  static NoiseModel additive_gaussian_value(double sigma_v);
  // F(x, xi) = f(x) + <xi, x> with xi ~ N(0, sigma^2 / n I); E||grad F - grad f||^2 = sigma^2.
  static NoiseModel gradient_consistent(double sigma);

  std::string name() const;
};

// One realization of xi. F(x, xi) = f(x) + shift + <linear, x>.
struct NoiseDraw {
  double shift = 0.0;
  Vector linear;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct McVectorEstimate {
  Vector mean;
  Vector std_error;
};

// Stochastic zeroth-order oracle with Gaussian smoothing radius mu.
//
// Stream convention for one estimator sample: the direction u is drawn from
// sample.child(0) and the noise xi from sample.child(1). Batch sample t of a
// step uses step.child(t).
class SmoothedOracle {
 public:
  SmoothedOracle(Objective f, NoiseModel noise, double mu, BlockLayout layout);
  SmoothedOracle(const SmoothedOracle& other);
  SmoothedOracle& operator=(const SmoothedOracle& other);

  double mu() const { return mu_; }
  const BlockLayout& layout() const { return layout_; }
  Index dimension() const { return layout_.dimension(); }
  const NoiseModel& noise() const { return noise_; }
  const Objective& objective() const { return f_; }

  std::uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }
  void reset_calls() { calls_.store(0, std::memory_order_relaxed); }
  // Merges the count of a worker copy back into this oracle.
  void add_calls(std::uint64_t count) const { calls_.fetch_add(count, std::memory_order_relaxed); }

  NoiseDraw draw_noise(RngStream rng) const;

  // F(x, xi) for a fresh xi drawn from `noise_rng`; one oracle call.
  double evaluate(const Vector& x, RngStream noise_rng) const;
  double evaluate(const Vector& x, const NoiseDraw& xi) const;

  // G_mu(x, xi, u) = [F(x + mu u, xi) - F(x, xi)] / mu * u with a shared xi; two oracle calls.
  Vector gsmooth_estimate(const Vector& x, const RngStream& sample) const;
  Vector gsmooth_estimate(const Vector& x, const Vector& u, const NoiseDraw& xi) const;

  // Mean of T_k estimators restricted to block s; 2 T_k oracle calls.
  Vector batch_block_estimate(const Vector& x, Index s, std::size_t batch,
                              const RngStream& step) const;
  // Mean of `count` full-vector estimators; 2 count oracle calls.
  Vector batch_full_estimate(const Vector& x, std::size_t count, const RngStream& stream) const;

  // Reference estimates of f_mu and grad f_mu from the noiseless objective. Not counted.
  McEstimate smoothed_value_mc(const Vector& x, std::size_t samples, RngStream rng) const;
  McVectorEstimate smoothed_grad_mc(const Vector& x, std::size_t samples, RngStream rng) const;

 private:
  double checked(double value, const Vector& x) const;
  // Accumulates T_k estimator samples into acc over coordinates [lo, lo + len).
  void accumulate(const Vector& x, Index lo, Index len, std::size_t count,
                  const RngStream& step, Vector& acc) const;

  Objective f_;
  NoiseModel noise_;
  double mu_;
  BlockLayout layout_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

}  // namespace zoblock
