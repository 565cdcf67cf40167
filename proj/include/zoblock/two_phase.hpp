#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "zoblock/solvers.hpp"

namespace zoblock {

struct TwoPhaseConfig {
  std::size_t runs = 1;          // S
  std::size_t post_samples = 1;  // size of the post-optimization estimator
  std::optional<double> epsilon;
  std::optional<double> Lambda;
  SolverConfig base;             // zs_bmd or zs_bccg_approx; base.seed is the master seed
  std::size_t jobs = 1;
};

struct TwoPhaseResult {
  std::size_t selected = 0;          // 0-based run index of the chosen candidate
  Vector x_star;
  std::vector<Vector> candidates;    // x_R of every run
  std::vector<double> alphas;        // alpha_R of every run
  std::vector<double> scores;        // ||P(x_i, G_{mu,post}(x_i), alpha_{R_i})||
  std::vector<std::uint64_t> run_calls;
  std::uint64_t oracle_calls = 0;    // S * 2 sum T_k + S * 2 * post_samples
};

// Seed of optimization run i and the post-optimization stream of candidate i.
std::uint64_t two_phase_run_seed(std::uint64_t master, std::size_t run);
RngStream two_phase_post_stream(std::uint64_t master, std::size_t run);

// Index of the smallest score; ties go to the lowest index.
std::size_t select_candidate(const std::vector<double>& scores);

TwoPhaseResult two_phase(const SmoothedOracle& oracle, const ProductGeometry& geometry,
                         const Vector& x1, const TwoPhaseConfig& config);

}  // namespace zoblock
