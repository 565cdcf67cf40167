#include "zoblock/diagnostics.hpp"

#include <cmath>

#include "zoblock/errors.hpp"

namespace zoblock {

std::string metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::grad_mapping_sq: return "grad_mapping_sq";
    case MetricKind::fw_gap: return "fw_gap";
    case MetricKind::block_fw_gap: return "block_fw_gap";
    case MetricKind::gen_fw_gap: return "gen_fw_gap";
    case MetricKind::suboptimality: return "suboptimality";
    case MetricKind::weighted_dist_sq: return "weighted_dist_sq";
  }
  return "unknown";
}

MetricKind parse_metric(const std::string& name) {
  for (MetricKind k : {MetricKind::grad_mapping_sq, MetricKind::fw_gap, MetricKind::block_fw_gap,
                       MetricKind::gen_fw_gap, MetricKind::suboptimality,
                       MetricKind::weighted_dist_sq}) {
    if (metric_name(k) == name) return k;
  }
  throw ConfigError("unknown metric '" + name + "'");
}

double grad_mapping_sq(const TestProblem& problem, const Vector& x, double alpha) {
  return gradient_mapping(problem.geometry(), x, problem.gradient(x), alpha).squaredNorm();
}

namespace {

double block_gap(const TestProblem& problem, const Vector& z, const Vector& grad, Index s,
                 bool with_chi) {
  const BlockLayout& layout = problem.layout();
  const BlockGeometry& geom = problem.geometry().block(s);
  if (!geom.has_lmo()) throw ConfigError("Frank-Wolfe gap needs bounded blocks");
  const Vector z_s = block_view(layout, z, s);
  const Vector g_s = block_view(layout, grad, s);
  if (!with_chi) return g_s.dot(z_s - geom.linear_lmo(g_s));
  const Vector t = geom.lmo(g_s);
  return g_s.dot(z_s - t) + geom.chi().value(z_s) - geom.chi().value(t);
}

}  // namespace

double block_fw_gap(const TestProblem& problem, const Vector& z, Index s) {
  return block_gap(problem, z, problem.gradient(z), s, false);
}

double fw_gap(const TestProblem& problem, const Vector& z) {
  const Vector grad = problem.gradient(z);
  double acc = 0.0;
  for (Index s = 0; s < problem.num_blocks(); ++s) acc += block_gap(problem, z, grad, s, false);
  return acc;
}

double block_gen_fw_gap(const TestProblem& problem, const Vector& z, Index s) {
  return block_gap(problem, z, problem.gradient(z), s, true);
}

double gen_fw_gap(const TestProblem& problem, const Vector& z) {
  const Vector grad = problem.gradient(z);
  double acc = 0.0;
  for (Index s = 0; s < problem.num_blocks(); ++s) acc += block_gap(problem, z, grad, s, true);
  return acc;
}

double suboptimality(const TestProblem& problem, const Vector& x) {
  auto opt = problem.optimal_value();
  if (!opt) throw ConfigError("problem '" + problem.name() + "' declares no optimal value");
  return problem.composite_value(x) - *opt;
}

double weighted_dist_sq(const BlockLayout& layout, const Vector& x, const Vector& x_star,
                        const std::vector<double>& probs) {
  layout.check_vector(x);
  layout.check_vector(x_star, "x*");
  if (static_cast<Index>(probs.size()) != layout.num_blocks()) {
    throw DimensionError("weighted distance needs one probability per block");
  }
  double acc = 0.0;
  for (Index s = 0; s < layout.num_blocks(); ++s) {
    const double p = probs[static_cast<std::size_t>(s)];
    if (!(p > 0.0)) throw ConfigError("weighted distance needs p_s > 0");
    acc += (block_view(layout, x, s) - block_view(layout, x_star, s)).squaredNorm() / p;
  }
  return acc;
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

FailureRate empirical_eps_lambda(const std::vector<double>& values, double epsilon) {
  if (values.empty()) throw ConfigError("failure rate needs at least one value");
  FailureRate out;
  out.count = values.size();
  for (double v : values) out.failures += v > epsilon ? 1 : 0;
  out.rate = static_cast<double>(out.failures) / static_cast<double>(out.count);
  out.ci = wilson_interval(out.failures, out.count);
  return out;
}

double evaluate_metric(const TestProblem& problem, MetricKind kind, const Vector& x, double alpha,
                       const std::vector<double>& probs, Index block) {
  switch (kind) {
    case MetricKind::grad_mapping_sq: return grad_mapping_sq(problem, x, alpha);
    case MetricKind::fw_gap: return fw_gap(problem, x);
    case MetricKind::block_fw_gap: return block_fw_gap(problem, x, block < 0 ? 0 : block);
    case MetricKind::gen_fw_gap: return gen_fw_gap(problem, x);
    case MetricKind::suboptimality: return suboptimality(problem, x);
    case MetricKind::weighted_dist_sq: {
      auto x_star = problem.minimizer();
      if (!x_star) throw ConfigError("problem '" + problem.name() + "' declares no minimizer");
      return weighted_dist_sq(problem.layout(), x, *x_star, probs);
    }
  }
  return 0.0;
}

}  // namespace zoblock
