#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zoblock/bounds.hpp"
#include "zoblock/diagnostics.hpp"
#include "zoblock/problems.hpp"
#include "zoblock/solvers.hpp"
#include "zoblock/two_phase.hpp"

namespace zoblock {

// A schedule entry in a config: either explicit values (one value means
// constant) or a named rule resolved against the problem constants.
struct ScheduleSpec {
  std::string rule;
  std::vector<double> values;
  bool empty() const { return rule.empty() && values.empty(); }
};

struct ProblemSpec {
  std::string name;
  Index n = 0;
  Index b = 1;
  ParamMap params;
};

struct SolverSpec {
  Algorithm algo = Algorithm::zs_bcd;
  std::optional<std::size_t> iterations;  // T
  std::optional<double> budget;           // T~, total oracle budget per run
  ScheduleSpec stepsize, batch, mu, delta;
  std::vector<double> block_probs;        // empty = uniform
  std::optional<double> sigma;            // defaults to the problem's sigma
  std::optional<double> D_tilde;
  std::size_t max_inner = 1000000;
  std::size_t full_trajectory_limit = 100000;
};

struct TwoPhaseSpec {
  std::size_t runs = 1;
  std::size_t post_samples = 1;
  std::optional<double> epsilon, Lambda;
};

struct ExperimentConfig {
  std::string source = "<config>";
  ProblemSpec problem;
  SolverSpec solver;
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  std::vector<MetricKind> metrics;
  std::string output_dir;
  std::optional<TwoPhaseSpec> two_phase;
};

// YAML parsing; errors are ConfigError with "<source>:<line>: " prefixes.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

// A bound paired with the metric it controls; value is already on the metric's scale.
struct BoundCheck {
  std::string id;
  MetricKind metric = MetricKind::grad_mapping_sq;
  double value = 0.0;
};

struct ResolvedExperiment {
  ExperimentConfig config;
  ProblemPtr problem;
  SolverConfig solver;  // seed filled per replication
  double mu = 0.0;
  double sigma = 0.0;
  Vector x1;
  std::vector<std::pair<std::string, double>> derived;  // schedule values for the manifest
  std::optional<TwoPhaseConfig> two_phase;
  std::vector<MetricKind> metrics;  // requested plus the metrics the bounds need
  std::vector<BoundCheck> bounds;
  std::vector<std::pair<std::string, std::string>> skipped_bounds;  // id, reason
};

// Builds the problem, derives schedules and validates everything without oracle calls.
ResolvedExperiment resolve_experiment(const ExperimentConfig& config);

// Human-readable schedule summary for --validate-only.
std::string describe(const ResolvedExperiment& resolved);

struct RunOptions {
  std::string out_dir = "out";
  std::optional<std::size_t> seeds;  // overrides replications
  std::size_t jobs = 1;
  bool gnuplot_stub = false;
};

struct ExperimentOutcome {
  std::size_t replications = 0;
  std::size_t failed_replications = 0;
  bool bounds_passed = true;
  std::vector<std::string> files;
};

// Runs all replications (seed master + r) and writes manifest.json,
// trajectory_<seed>.csv (candidates_<seed>.csv for two-phase) and summary.json.
ExperimentOutcome run_experiment(const ResolvedExperiment& resolved, const RunOptions& options);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace zoblock
