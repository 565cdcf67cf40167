#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "zoblock/block_space.hpp"
#include "zoblock/diagnostics.hpp"
#include "zoblock/prox_geometry.hpp"
#include "zoblock/rng.hpp"
#include "zoblock/zeroth_oracle.hpp"

namespace zoblock {

enum class Algorithm { zs_bcd, zs_bmd, zs_bccg_smooth, zs_bccg_composite, zs_bccg_approx };

std::string algorithm_name(Algorithm algo);
Algorithm parse_algorithm(const std::string& name);
const std::vector<std::string>& algorithm_catalog();

struct SolverConfig {
  Algorithm algo = Algorithm::zs_bcd;
  std::size_t iterations = 0;             // T
  std::vector<double> stepsizes;          // alpha_k, length T
  std::vector<std::size_t> batch_sizes;   // T_k, length T (zs_bcd uses T_k = 1)
  std::vector<double> block_probs;        // p_s, length b
  std::vector<double> deltas;             // delta_k, zs_bccg_approx only
  std::vector<double> block_lipschitz;    // L_s
  double global_lipschitz = 0.0;          // L_f
  std::uint64_t seed = 0;
  std::size_t max_inner = 1000000;        // CndG cap
  std::size_t full_trajectory_limit = 100000;

  // Fills constant schedules of length T and uniform block probabilities.
  static SolverConfig constant(Algorithm algo, std::size_t T, double alpha, std::size_t batch,
                               Index num_blocks, std::vector<double> block_lipschitz,
                               double global_lipschitz, std::uint64_t seed);

  double L_hat() const;
  double L_check() const;
};

struct OutputDistribution {
  std::vector<double> weights;  // normalized, index k - 1 for iterate k
};

OutputDistribution output_weights_zs_bcd(const SolverConfig& config, Index n);
OutputDistribution output_weights_zs_bmd(const SolverConfig& config);
OutputDistribution output_weights_zs_bccg(const SolverConfig& config);
OutputDistribution output_weights_zs_bccg_approx(const SolverConfig& config);
OutputDistribution output_weights(const SolverConfig& config, Index n);

// Normalizes nonnegative raw weights; negative or all-zero weights are rejected.
OutputDistribution normalize_weights(const std::vector<double>& raw, const std::string& rule);

// Inverse-CDF draw from weights; returns an index in {1..T}.
std::size_t sample_output_index(const OutputDistribution& dist, RngStream& rng);

// Inverse-CDF draw of a 0-based index from nonnegative weights summing to 1.
std::size_t sample_categorical(const std::vector<double>& probs, RngStream& rng);

struct RunReport {
  Algorithm algo = Algorithm::zs_bcd;
  std::vector<std::size_t> iterate_index;  // 1-based iterate numbers of stored iterates
  std::vector<Vector> trajectory;
  std::vector<Index> blocks;                 // i_k for k = 1..T
  std::vector<std::uint64_t> cumulative_calls;  // after step k
  std::vector<std::size_t> inner_iterations;    // CndG inner counts, zs_bccg_approx only
  OutputDistribution distribution;
  std::size_t R = 0;
  Vector x_R;
  double alpha_R = 0.0;
  std::uint64_t oracle_calls = 0;
  double wall_seconds = 0.0;
  // Metric values aligned with iterate_index.
  std::map<std::string, std::vector<double>> metrics;

  // Stored iterate k (1-based); throws if it was thinned away.
  const Vector& iterate(std::size_t k) const;
};

// Validates a configuration against the oracle, geometry and start point
// without calling the oracle. Throws ConfigError / AdmissibilityError.
void validate_config(const SolverConfig& config, const SmoothedOracle& oracle,
                     const ProductGeometry* geometry, const Vector& x1);

RunReport zs_bcd(const SmoothedOracle& oracle, const Vector& x1, const SolverConfig& config);
RunReport zs_bmd(const SmoothedOracle& oracle, const ProductGeometry& geometry, const Vector& x1,
                 const SolverConfig& config);
RunReport zs_bccg_smooth(const SmoothedOracle& oracle, const ProductGeometry& geometry,
                         const Vector& x1, const SolverConfig& config);
RunReport zs_bccg_composite(const SmoothedOracle& oracle, const ProductGeometry& geometry,
                            const Vector& x1, const SolverConfig& config);
RunReport zs_bccg_approx(const SmoothedOracle& oracle, const ProductGeometry& geometry,
                         const Vector& x1, const SolverConfig& config);

RunReport solve(const SmoothedOracle& oracle, const ProductGeometry& geometry, const Vector& x1,
                const SolverConfig& config);

// Evaluates metrics on every stored iterate, using alpha_k for iterate k (alpha_T for T + 1).
void record_metrics(RunReport& report, const TestProblem& problem,
                    const std::vector<MetricKind>& kinds, const SolverConfig& config);

// RNG stream layout of a run with seed s: RngStream(s).child(kBlockStream) picks
// blocks, .child(kOutputStream) picks R, and .child(kSampleStream).child(k) feeds
// the estimator batch of step k.
inline constexpr std::uint64_t kBlockStream = 1;
inline constexpr std::uint64_t kOutputStream = 2;
inline constexpr std::uint64_t kSampleStream = 3;

}  // namespace zoblock
