#include "zoblock/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "zoblock/errors.hpp"

namespace zoblock {

namespace {

constexpr double kDivergenceNorm = 1e12;

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double min_prob(const SolverConfig& c) {
  return *std::min_element(c.block_probs.begin(), c.block_probs.end());
}

double max_prob_lipschitz(const SolverConfig& c) {
  double m = 0.0;
  for (std::size_t s = 0; s < c.block_probs.size(); ++s) {
    m = std::max(m, c.block_probs[s] * c.block_lipschitz[s]);
  }
  return m;
}

bool needs_lipschitz(Algorithm a) {
  return a == Algorithm::zs_bcd || a == Algorithm::zs_bmd || a == Algorithm::zs_bccg_approx;
}

bool is_conditional_gradient(Algorithm a) {
  return a == Algorithm::zs_bccg_smooth || a == Algorithm::zs_bccg_composite ||
         a == Algorithm::zs_bccg_approx;
}

void check_admissibility(const SolverConfig& c, Index n) {
  const std::size_t T = c.iterations;
  switch (c.algo) {
    case Algorithm::zs_bcd: {
      const double limit = min_prob(c) / (2.0 * max_prob_lipschitz(c) * (static_cast<double>(n) + 4.0));
      for (std::size_t k = 0; k < T; ++k) {
        if (!(c.stepsizes[k] > 0.0) || c.stepsizes[k] > limit) {
          throw AdmissibilityError(
              "ZS-BCD stepsize condition 0 < alpha_k <= min_s p_s / [2 max_s{p_s L_s} (n+4)] = " +
              fmt_double(limit) + " violated at k=" + std::to_string(k + 1) +
              " (alpha_k = " + fmt_double(c.stepsizes[k]) + ")");
        }
      }
      break;
    }
    case Algorithm::zs_bmd:
    case Algorithm::zs_bccg_approx: {
      const bool bmd = c.algo == Algorithm::zs_bmd;
      const double factor = bmd ? 2.0 : 1.0;
      const double limit = factor / c.L_hat();
      for (std::size_t k = 0; k < T; ++k) {
        if (!(c.stepsizes[k] > 0.0) || c.stepsizes[k] > limit) {
          throw AdmissibilityError(
              std::string(bmd ? "ZS-BMD stepsize condition 0 < alpha_k <= 2 / L_s"
                              : "approximate ZS-BCCG stepsize condition 0 < alpha_k <= 1 / L_s") +
              " for every block (limit " + fmt_double(limit) + ") violated at k=" +
              std::to_string(k + 1) + " (alpha_k = " + fmt_double(c.stepsizes[k]) + ")");
        }
      }
      break;
    }
    case Algorithm::zs_bccg_smooth:
    case Algorithm::zs_bccg_composite:
      for (std::size_t k = 0; k < T; ++k) {
        if (!(c.stepsizes[k] >= 0.0 && c.stepsizes[k] <= 1.0)) {
          throw AdmissibilityError("ZS-BCCG stepsize condition 0 <= alpha_k <= 1 violated at k=" +
                                   std::to_string(k + 1));
        }
      }
      break;
  }
}

struct TrajectoryRecorder {
  std::size_t stride = 1;
  std::size_t R = 0;
  RunReport* report = nullptr;

  void offer(std::size_t j, const Vector& x) {
    if (j == R) report->x_R = x;
    if ((j - 1) % stride == 0 || j == R) {
      report->iterate_index.push_back(j);
      report->trajectory.push_back(x);
    }
  }
};

// Shared driver: block draw, batch estimate, block update, bookkeeping.
template <class Update>
RunReport run_block_method(const SmoothedOracle& oracle, const ProductGeometry* geometry,
                           const Vector& x1, const SolverConfig& config, Update&& update) {
  validate_config(config, oracle, geometry, x1);
  const auto started = std::chrono::steady_clock::now();
  const Index n = oracle.dimension();
  const std::size_t T = config.iterations;

  RunReport report;
  report.algo = config.algo;
  report.distribution = output_weights(config, n);

  const RngStream root(config.seed);
  RngStream block_rng = root.child(kBlockStream);
  RngStream output_rng = root.child(kOutputStream);
  const RngStream sample_root = root.child(kSampleStream);
  report.R = sample_output_index(report.distribution, output_rng);
  report.alpha_R = config.stepsizes[report.R - 1];

  TrajectoryRecorder recorder;
  recorder.report = &report;
  recorder.R = report.R;
  if (T + 1 > config.full_trajectory_limit) {
    recorder.stride = (T + 9999) / 10000;
  }

  SmoothedOracle local(oracle);
  local.reset_calls();
  const bool guard = geometry == nullptr || !geometry->bounded();
  const BlockLayout& layout = oracle.layout();

  report.blocks.reserve(T);
  report.cumulative_calls.reserve(T);
  Vector x = x1;
  recorder.offer(1, x);
  for (std::size_t k = 1; k <= T; ++k) {
    const Index s = static_cast<Index>(sample_categorical(config.block_probs, block_rng));
    const std::size_t batch = config.batch_sizes.empty() ? 1 : config.batch_sizes[k - 1];
    const Vector g = local.batch_block_estimate(x, s, batch, sample_root.child(k));
    auto x_s = block_view(layout, x, s);
    update(k, s, g, x_s, report);
    if (!x_s.allFinite()) {
      throw NumericalError("non-finite iterate after step " + std::to_string(k));
    }
    if (guard && x.norm() > kDivergenceNorm) {
      throw DivergenceError("iterates diverged (norm above 1e12) at step " + std::to_string(k), k);
    }
    report.blocks.push_back(s);
    report.cumulative_calls.push_back(local.calls());
    recorder.offer(k + 1, x);
  }
  report.oracle_calls = local.calls();
  oracle.add_calls(report.oracle_calls);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace

std::string algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::zs_bcd: return "zs_bcd";
    case Algorithm::zs_bmd: return "zs_bmd";
    case Algorithm::zs_bccg_smooth: return "zs_bccg_smooth";
    case Algorithm::zs_bccg_composite: return "zs_bccg_composite";
    case Algorithm::zs_bccg_approx: return "zs_bccg_approx";
  }
  return "unknown";
}

const std::vector<std::string>& algorithm_catalog() {
  static const std::vector<std::string> names{"zs_bcd", "zs_bmd", "zs_bccg_smooth",
                                              "zs_bccg_composite", "zs_bccg_approx"};
  return names;
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::zs_bcd, Algorithm::zs_bmd, Algorithm::zs_bccg_smooth,
                      Algorithm::zs_bccg_composite, Algorithm::zs_bccg_approx}) {
    if (algorithm_name(a) == name) return a;
  }
  throw ConfigError("unknown algorithm '" + name + "'");
}

SolverConfig SolverConfig::constant(Algorithm algo, std::size_t T, double alpha, std::size_t batch,
                                    Index num_blocks, std::vector<double> block_lipschitz,
                                    double global_lipschitz, std::uint64_t seed) {
  SolverConfig c;
  c.algo = algo;
  c.iterations = T;
  c.stepsizes.assign(T, alpha);
  c.batch_sizes.assign(T, algo == Algorithm::zs_bcd ? 1 : batch);
  c.block_probs.assign(static_cast<std::size_t>(num_blocks), 1.0 / static_cast<double>(num_blocks));
  c.block_lipschitz = std::move(block_lipschitz);
  c.global_lipschitz = global_lipschitz;
  c.seed = seed;
  return c;
}

double SolverConfig::L_hat() const {
  if (block_lipschitz.empty()) throw ConfigError("block Lipschitz constants are not set");
  return *std::max_element(block_lipschitz.begin(), block_lipschitz.end());
}

double SolverConfig::L_check() const {
  if (block_lipschitz.empty()) throw ConfigError("block Lipschitz constants are not set");
  return *std::min_element(block_lipschitz.begin(), block_lipschitz.end());
}

OutputDistribution normalize_weights(const std::vector<double>& raw, const std::string& rule) {
  if (raw.empty()) throw ConfigError("output distribution needs at least one iteration");
  double total = 0.0;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    if (!(raw[k] >= 0.0) || !std::isfinite(raw[k])) {
      throw AdmissibilityError(rule + ": negative output weight at k=" + std::to_string(k + 1) +
                               "; the stepsize violates the admissibility condition");
    }
    total += raw[k];
  }
  if (!(total > 0.0)) {
    throw AdmissibilityError(rule + ": all output weights vanish (stepsizes at the admissibility "
                             "boundary)");
  }
  OutputDistribution d;
  d.weights.reserve(raw.size());
  for (double w : raw) d.weights.push_back(w / total);
  return d;
}

OutputDistribution output_weights_zs_bcd(const SolverConfig& c, Index n) {
  const double p_min = min_prob(c), pL = max_prob_lipschitz(c);
  std::vector<double> raw;
  raw.reserve(c.stepsizes.size());
  for (double a : c.stepsizes) {
    raw.push_back(a * (p_min - 2.0 * (static_cast<double>(n) + 4.0) * pL * a));
  }
  return normalize_weights(raw, "ZS-BCD output weights alpha_k [min p_s - 2(n+4) max p_s L_s alpha_k]");
}

OutputDistribution output_weights_zs_bmd(const SolverConfig& c) {
  std::vector<double> raw;
  for (double a : c.stepsizes) {
    double m = INFINITY;
    for (std::size_t s = 0; s < c.block_probs.size(); ++s) {
      m = std::min(m, c.block_probs[s] * (1.0 - c.block_lipschitz[s] / 2.0 * a));
    }
    raw.push_back(a * m);
  }
  return normalize_weights(raw, "ZS-BMD output weights alpha_k min_s p_s (1 - L_s alpha_k / 2)");
}

OutputDistribution output_weights_zs_bccg(const SolverConfig& c) {
  return normalize_weights(c.stepsizes, "ZS-BCCG output weights alpha_k / sum alpha");
}

OutputDistribution output_weights_zs_bccg_approx(const SolverConfig& c) {
  std::vector<double> raw;
  for (double a : c.stepsizes) {
    double m = INFINITY;
    for (std::size_t s = 0; s < c.block_probs.size(); ++s) {
      m = std::min(m, c.block_probs[s] * (1.0 - c.block_lipschitz[s] * a));
    }
    raw.push_back(a * m);
  }
  return normalize_weights(raw,
                           "approximate ZS-BCCG output weights alpha_k min_s p_s (1 - L_s alpha_k)");
}

OutputDistribution output_weights(const SolverConfig& c, Index n) {
  switch (c.algo) {
    case Algorithm::zs_bcd: return output_weights_zs_bcd(c, n);
    case Algorithm::zs_bmd: return output_weights_zs_bmd(c);
    case Algorithm::zs_bccg_smooth:
    case Algorithm::zs_bccg_composite: return output_weights_zs_bccg(c);
    case Algorithm::zs_bccg_approx: return output_weights_zs_bccg_approx(c);
  }
  throw ConfigError("unknown algorithm");
}

std::size_t sample_categorical(const std::vector<double>& probs, RngStream& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) last_positive = i;
    cum += probs[i];
    if (u < cum) return i;
  }
  return last_positive;
}

std::size_t sample_output_index(const OutputDistribution& dist, RngStream& rng) {
  if (dist.weights.empty()) throw ConfigError("empty output distribution");
  return sample_categorical(dist.weights, rng) + 1;
}

const Vector& RunReport::iterate(std::size_t k) const {
  auto it = std::lower_bound(iterate_index.begin(), iterate_index.end(), k);
  if (it == iterate_index.end() || *it != k) {
    throw IndexError("iterate " + std::to_string(k) + " is not stored in the trajectory");
  }
  return trajectory[static_cast<std::size_t>(it - iterate_index.begin())];
}

void validate_config(const SolverConfig& c, const SmoothedOracle& oracle,
                     const ProductGeometry* geometry, const Vector& x1) {
  const BlockLayout& layout = oracle.layout();
  const Index n = layout.dimension();
  const std::size_t b = static_cast<std::size_t>(layout.num_blocks());
  const std::string algo = algorithm_name(c.algo);

  if (c.iterations < 1) throw ConfigError(algo + ": iteration limit T must be at least 1");
  if (c.stepsizes.size() != c.iterations) {
    throw ConfigError(algo + ": expected " + std::to_string(c.iterations) + " stepsizes, got " +
                      std::to_string(c.stepsizes.size()));
  }
  if (c.algo == Algorithm::zs_bcd) {
    if (!c.batch_sizes.empty() &&
        (c.batch_sizes.size() != c.iterations ||
         std::any_of(c.batch_sizes.begin(), c.batch_sizes.end(), [](std::size_t t) { return t != 1; }))) {
      throw ConfigError("zs_bcd uses single-sample estimators (T_k = 1)");
    }
  } else {
    if (c.batch_sizes.size() != c.iterations) {
      throw ConfigError(algo + ": expected " + std::to_string(c.iterations) + " batch sizes");
    }
    for (std::size_t t : c.batch_sizes) {
      if (t < 1) throw ConfigError(algo + ": batch sizes T_k must be at least 1");
    }
  }
  if (c.block_probs.size() != b) {
    throw ConfigError(algo + ": expected " + std::to_string(b) + " block probabilities");
  }
  double total = 0.0;
  for (std::size_t s = 0; s < b; ++s) {
    if (!(c.block_probs[s] > 0.0)) {
      throw ConfigError(algo + ": block probability p_" + std::to_string(s) +
                        " must be positive (a block with p_s = 0 is never updated)");
    }
    total += c.block_probs[s];
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError(algo + ": block probabilities must sum to 1");
  if (needs_lipschitz(c.algo)) {
    if (c.block_lipschitz.size() != b) {
      throw ConfigError(algo + ": expected " + std::to_string(b) + " block Lipschitz constants");
    }
    for (double L : c.block_lipschitz) {
      if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError(algo + ": L_s must be positive");
    }
  }
  if (c.algo == Algorithm::zs_bccg_approx) {
    if (c.deltas.size() != c.iterations) {
      throw ConfigError(algo + ": expected " + std::to_string(c.iterations) + " deltas");
    }
    for (double d : c.deltas) {
      if (!(d > 0.0)) throw ConfigError(algo + ": approximation parameters delta_k must be positive");
    }
  }

  layout.check_vector(x1, "start point");
  if (!x1.allFinite()) throw ConfigError(algo + ": start point is not finite");
  if (geometry) {
    if (!(geometry->layout() == layout)) throw ConfigError(algo + ": geometry and oracle layouts differ");
    if (c.algo == Algorithm::zs_bcd) {
      for (Index s = 0; s < geometry->num_blocks(); ++s) {
        const BlockGeometry& g = geometry->block(s);
        if (g.feasible().bounded() || g.chi().kind != Regularizer::Kind::zero ||
            g.phi().kind != DistanceGenerator::Kind::euclidean) {
          throw ConfigError("zs_bcd solves unconstrained smooth problems; block " +
                            std::to_string(s) + " is " + g.name());
        }
      }
    }
    if (is_conditional_gradient(c.algo) && !geometry->bounded()) {
      throw ConfigError(algo + " needs every block to be bounded");
    }
    if (!geometry->contains(x1, 1e-10)) throw ConfigError(algo + ": start point is infeasible");
  } else if (c.algo != Algorithm::zs_bcd) {
    throw ConfigError(algo + " needs a geometry");
  }
  check_admissibility(c, n);
  (void)output_weights(c, n);
}

RunReport zs_bcd(const SmoothedOracle& oracle, const Vector& x1, const SolverConfig& config) {
  if (config.algo != Algorithm::zs_bcd) throw ConfigError("zs_bcd called with another algorithm");
  return run_block_method(oracle, nullptr, x1, config,
                          [&](std::size_t k, Index, const Vector& g, auto& x_s, RunReport&) {
                            x_s -= config.stepsizes[k - 1] * g;
                          });
}

RunReport zs_bmd(const SmoothedOracle& oracle, const ProductGeometry& geometry, const Vector& x1,
                 const SolverConfig& config) {
  if (config.algo != Algorithm::zs_bmd) throw ConfigError("zs_bmd called with another algorithm");
  return run_block_method(oracle, &geometry, x1, config,
                          [&](std::size_t k, Index s, const Vector& g, auto& x_s, RunReport&) {
                            x_s = geometry.block(s).prox(x_s, g, config.stepsizes[k - 1]);
                          });
}

namespace {

RunReport conditional_gradient(const SmoothedOracle& oracle, const ProductGeometry& geometry,
                               const Vector& z1, const SolverConfig& config, bool with_chi) {
  return run_block_method(oracle, &geometry, z1, config,
                          [&](std::size_t k, Index s, const Vector& g, auto& z_s, RunReport&) {
                            const BlockGeometry& geom = geometry.block(s);
                            const Vector v = with_chi ? geom.lmo(g) : geom.linear_lmo(g);
                            const double a = config.stepsizes[k - 1];
                            z_s = (1.0 - a) * z_s + a * v;
                          });
}

}  // namespace

RunReport zs_bccg_smooth(const SmoothedOracle& oracle, const ProductGeometry& geometry,
                         const Vector& x1, const SolverConfig& config) {
  if (config.algo != Algorithm::zs_bccg_smooth) {
    throw ConfigError("zs_bccg_smooth called with another algorithm");
  }
  return conditional_gradient(oracle, geometry, x1, config, false);
}

RunReport zs_bccg_composite(const SmoothedOracle& oracle, const ProductGeometry& geometry,
                            const Vector& x1, const SolverConfig& config) {
  if (config.algo != Algorithm::zs_bccg_composite) {
    throw ConfigError("zs_bccg_composite called with another algorithm");
  }
  return conditional_gradient(oracle, geometry, x1, config, true);
}

RunReport zs_bccg_approx(const SmoothedOracle& oracle, const ProductGeometry& geometry,
                         const Vector& x1, const SolverConfig& config) {
  if (config.algo != Algorithm::zs_bccg_approx) {
    throw ConfigError("zs_bccg_approx called with another algorithm");
  }
  return run_block_method(
      oracle, &geometry, x1, config,
      [&](std::size_t k, Index s, const Vector& g, auto& x_s, RunReport& report) {
        try {
          CndgResult r = cndg(geometry.block(s), x_s, g, config.stepsizes[k - 1],
                              config.deltas[k - 1], config.max_inner);
          x_s = r.point;
          report.inner_iterations.push_back(r.inner_iterations);
        } catch (const NonTerminationError& e) {
          throw NonTerminationError("step " + std::to_string(k) + ": " + e.what(), e.last_gap());
        }
      });
}

RunReport solve(const SmoothedOracle& oracle, const ProductGeometry& geometry, const Vector& x1,
                const SolverConfig& config) {
  switch (config.algo) {
    case Algorithm::zs_bcd:
      validate_config(config, oracle, &geometry, x1);
      return zs_bcd(oracle, x1, config);
    case Algorithm::zs_bmd: return zs_bmd(oracle, geometry, x1, config);
    case Algorithm::zs_bccg_smooth: return zs_bccg_smooth(oracle, geometry, x1, config);
    case Algorithm::zs_bccg_composite: return zs_bccg_composite(oracle, geometry, x1, config);
    case Algorithm::zs_bccg_approx: return zs_bccg_approx(oracle, geometry, x1, config);
  }
  throw ConfigError("unknown algorithm");
}

void record_metrics(RunReport& report, const TestProblem& problem,
                    const std::vector<MetricKind>& kinds, const SolverConfig& config) {
  const std::size_t T = config.iterations;
  for (MetricKind kind : kinds) {
    std::vector<double>& values = report.metrics[metric_name(kind)];
    values.clear();
    values.reserve(report.trajectory.size());
    for (std::size_t i = 0; i < report.trajectory.size(); ++i) {
      const std::size_t j = report.iterate_index[i];
      const std::size_t k = std::min(j, T);
      const Index block = report.blocks.empty() ? 0 : report.blocks[k - 1];
      values.push_back(evaluate_metric(problem, kind, report.trajectory[i],
                                       config.stepsizes[k - 1], config.block_probs, block));
    }
  }
}

}  // namespace zoblock
