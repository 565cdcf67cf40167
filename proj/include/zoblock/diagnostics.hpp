#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "zoblock/block_space.hpp"
#include "zoblock/problems.hpp"

namespace zoblock {

enum class MetricKind {
  grad_mapping_sq,
  fw_gap,
  block_fw_gap,
  gen_fw_gap,
  suboptimality,
  weighted_dist_sq,
};

struct MetricSample {
  MetricKind kind = MetricKind::grad_mapping_sq;
  double value = 0.0;
  std::size_t iterate = 0;
  Index block = -1;  // block_fw_gap only
};

std::string metric_name(MetricKind kind);
MetricKind parse_metric(const std::string& name);

// ||P(x, grad f(x), alpha)||^2.
double grad_mapping_sq(const TestProblem& problem, const Vector& x, double alpha);

// <grad_s f(z), z_s - argmin_{y in X_s} <grad_s f(z), y>>.
double block_fw_gap(const TestProblem& problem, const Vector& z, Index s);
double fw_gap(const TestProblem& problem, const Vector& z);

// Same with chi_s included in the linear subproblem and the gap.
double block_gen_fw_gap(const TestProblem& problem, const Vector& z, Index s);
double gen_fw_gap(const TestProblem& problem, const Vector& z);

// Phi(x) - Phi*; needs a declared optimal value.
double suboptimality(const TestProblem& problem, const Vector& x);

// sum_s ||x_s - x*_s||^2 / p_s.
double weighted_dist_sq(const BlockLayout& layout, const Vector& x, const Vector& x_star,
                        const std::vector<double>& probs);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct FailureRate {
  std::size_t failures = 0;
  std::size_t count = 0;
  double rate = 0.0;
  Interval ci;
};

// Fraction of values strictly above epsilon with a Wilson 95% interval.
FailureRate empirical_eps_lambda(const std::vector<double>& values, double epsilon);

double evaluate_metric(const TestProblem& problem, MetricKind kind, const Vector& x, double alpha,
                       const std::vector<double>& probs, Index block = -1);

}  // namespace zoblock
