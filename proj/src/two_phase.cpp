#include "zoblock/two_phase.hpp"

#include "zoblock/errors.hpp"
#include "zoblock/parallel.hpp"

namespace zoblock {

namespace {
constexpr std::uint64_t kRunTag = 11;
constexpr std::uint64_t kPostTag = 12;
}  // namespace

std::uint64_t two_phase_run_seed(std::uint64_t master, std::size_t run) {
  return RngStream(master).child(kRunTag).child(run).key();
}

RngStream two_phase_post_stream(std::uint64_t master, std::size_t run) {
  return RngStream(master).child(kPostTag).child(run);
}

std::size_t select_candidate(const std::vector<double>& scores) {
  if (scores.empty()) throw ConfigError("no candidates to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] < scores[best]) best = i;
  }
  return best;
}

TwoPhaseResult two_phase(const SmoothedOracle& oracle, const ProductGeometry& geometry,
                         const Vector& x1, const TwoPhaseConfig& config) {
  if (config.runs < 1) throw ConfigError("two-phase needs at least one run (S >= 1)");
  if (config.post_samples < 1) throw ConfigError("two-phase needs a post-optimization sample size >= 1");
  if (config.base.algo != Algorithm::zs_bmd && config.base.algo != Algorithm::zs_bccg_approx) {
    throw ConfigError("two-phase wraps zs_bmd or zs_bccg_approx, not " +
                      algorithm_name(config.base.algo));
  }
  validate_config(config.base, oracle, &geometry, x1);

  const std::size_t S = config.runs;
  TwoPhaseResult out;
  out.candidates.resize(S);
  out.alphas.resize(S);
  out.scores.resize(S);
  out.run_calls.resize(S);

  parallel_for(S, config.jobs, [&](std::size_t i) {
    SmoothedOracle local(oracle);
    local.reset_calls();
    SolverConfig run = config.base;
    run.seed = two_phase_run_seed(config.base.seed, i);
    const RunReport report = solve(local, geometry, x1, run);
    const Vector g = local.batch_full_estimate(report.x_R, config.post_samples,
                                               two_phase_post_stream(config.base.seed, i));
    out.candidates[i] = report.x_R;
    out.alphas[i] = report.alpha_R;
    out.scores[i] = gradient_mapping(geometry, report.x_R, g, report.alpha_R).norm();
    out.run_calls[i] = local.calls();
  });

  for (std::uint64_t c : out.run_calls) out.oracle_calls += c;
  oracle.add_calls(out.oracle_calls);
  out.selected = select_candidate(out.scores);
  out.x_star = out.candidates[out.selected];
  return out;
}

}  // namespace zoblock
