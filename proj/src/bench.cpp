#include "zoblock/bench.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "zoblock/errors.hpp"
#include "zoblock/parallel.hpp"
#include "zoblock/schedules.hpp"

namespace zoblock {

namespace {

using json = nlohmann::ordered_json;

// ------------------------------------------------------------------ parsing

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
    const YAML::Mark mark = node.Mark();
    if (mark.is_null()) throw ConfigError(source_ + ": " + message);
    throw ConfigError(source_ + ":" + std::to_string(mark.line + 1) + ": " + message);
  }

  void require_map(const YAML::Node& node, const std::string& what) const {
    if (!node.IsMap()) fail(node, "'" + what + "' must be a mapping");
  }

  void allowed_keys(const YAML::Node& node, const std::string& what,
                    const std::set<std::string>& keys) const {
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      if (!keys.count(key)) fail(kv.first, "unknown key '" + key + "' in '" + what + "'");
    }
  }

  double number(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, "'" + what + "' must be a number");
    try {
      return node.as<double>();
    } catch (const YAML::Exception&) {
      fail(node, "'" + what + "' must be a number, got '" + node.Scalar() + "'");
    }
  }

  std::size_t count(const YAML::Node& node, const std::string& what, std::size_t min = 0) const {
    const double v = number(node, what);
    if (!(v >= static_cast<double>(min)) || v != std::floor(v) || v > 1e15) {
      fail(node, "'" + what + "' must be an integer >= " + std::to_string(min));
    }
    return static_cast<std::size_t>(v);
  }

  std::uint64_t seed(const YAML::Node& node) const {
    if (!node.IsScalar()) fail(node, "'seed' must be a nonnegative integer");
    const std::string& s = node.Scalar();
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      fail(node, "'seed' must be a nonnegative integer, got '" + s + "'");
    }
    return v;
  }

  std::string text(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, "'" + what + "' must be a string");
    return node.Scalar();
  }

  std::vector<double> numbers(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence()) fail(node, "'" + what + "' must be a list of numbers");
    std::vector<double> out;
    for (const auto& item : node) out.push_back(number(item, what));
    return out;
  }

  ScheduleSpec schedule(const YAML::Node& node, const std::string& what,
                        const std::set<std::string>& rules) const {
    ScheduleSpec spec;
    if (node.IsSequence()) {
      spec.values = numbers(node, what);
      if (spec.values.empty()) fail(node, "'" + what + "' list is empty");
      return spec;
    }
    if (!node.IsScalar()) fail(node, "'" + what + "' must be a number, a list or a rule name");
    double v = 0.0;
    if (YAML::convert<double>::decode(node, v)) {
      spec.values = {v};
      return spec;
    }
    spec.rule = node.Scalar();
    if (!rules.count(spec.rule)) {
      std::string list;
      for (const auto& r : rules) list += (list.empty() ? "" : ", ") + r;
      fail(node, "unknown rule '" + spec.rule + "' for '" + what + "' (expected a number or one of: " +
                     list + ")");
    }
    return spec;
  }

 private:
  std::string source_;
};

const std::set<std::string> kStepRules{"corollary", "inverse_L_hat", "half_inverse_L_hat",
                                       "inverse_sqrt_T"};
const std::set<std::string> kCorollaryRule{"corollary"};
const std::set<std::string> kDeltaRules{"corollary", "inverse_3T"};

ProblemSpec parse_problem(const Reader& r, const YAML::Node& node) {
  r.require_map(node, "problem");
  r.allowed_keys(node, "problem", {"name", "n", "b", "params"});
  ProblemSpec p;
  if (!node["name"]) r.fail(node, "'problem.name' is required");
  if (!node["n"]) r.fail(node, "'problem.n' is required");
  p.name = r.text(node["name"], "problem.name");
  p.n = static_cast<Index>(r.count(node["n"], "problem.n", 1));
  if (node["b"]) p.b = static_cast<Index>(r.count(node["b"], "problem.b", 1));
  if (node["params"]) {
    r.require_map(node["params"], "problem.params");
    for (const auto& kv : node["params"]) {
      const std::string key = kv.first.as<std::string>();
      p.params[key] = r.number(kv.second, "problem.params." + key);
    }
  }
  return p;
}

SolverSpec parse_solver(const Reader& r, const YAML::Node& node) {
  r.require_map(node, "solver");
  r.allowed_keys(node, "solver",
                 {"algo", "T", "budget", "stepsize", "batch", "mu", "delta", "block_probs", "sigma",
                  "D_tilde", "max_inner", "trajectory_limit"});
  SolverSpec s;
  if (!node["algo"]) r.fail(node, "'solver.algo' is required");
  try {
    s.algo = parse_algorithm(r.text(node["algo"], "solver.algo"));
  } catch (const ConfigError& e) {
    r.fail(node["algo"], e.what());
  }
  if (node["T"]) s.iterations = r.count(node["T"], "solver.T", 1);
  if (node["budget"]) s.budget = r.number(node["budget"], "solver.budget");
  if (node["stepsize"]) s.stepsize = r.schedule(node["stepsize"], "solver.stepsize", kStepRules);
  if (node["batch"]) s.batch = r.schedule(node["batch"], "solver.batch", kCorollaryRule);
  if (node["mu"]) {
    s.mu = r.schedule(node["mu"], "solver.mu", kCorollaryRule);
    if (s.mu.values.size() > 1) r.fail(node["mu"], "'solver.mu' must be a single value");
  }
  if (node["delta"]) s.delta = r.schedule(node["delta"], "solver.delta", kDeltaRules);
  if (node["block_probs"]) s.block_probs = r.numbers(node["block_probs"], "solver.block_probs");
  if (node["sigma"]) s.sigma = r.number(node["sigma"], "solver.sigma");
  if (node["D_tilde"]) s.D_tilde = r.number(node["D_tilde"], "solver.D_tilde");
  if (node["max_inner"]) s.max_inner = r.count(node["max_inner"], "solver.max_inner", 1);
  if (node["trajectory_limit"]) {
    s.full_trajectory_limit = r.count(node["trajectory_limit"], "solver.trajectory_limit", 1);
  }
  return s;
}

TwoPhaseSpec parse_two_phase(const Reader& r, const YAML::Node& node) {
  r.require_map(node, "two_phase");
  r.allowed_keys(node, "two_phase", {"runs", "post_samples", "epsilon", "Lambda"});
  TwoPhaseSpec t;
  t.runs = 0;
  t.post_samples = 0;
  if (node["runs"]) t.runs = r.count(node["runs"], "two_phase.runs", 1);
  if (node["post_samples"]) t.post_samples = r.count(node["post_samples"], "two_phase.post_samples", 1);
  if (node["epsilon"]) t.epsilon = r.number(node["epsilon"], "two_phase.epsilon");
  if (node["Lambda"]) t.Lambda = r.number(node["Lambda"], "two_phase.Lambda");
  if ((t.runs == 0 || t.post_samples == 0) && !(t.epsilon && t.Lambda)) {
    r.fail(node, "'two_phase' needs runs and post_samples, or epsilon and Lambda to derive them");
  }
  return t;
}

// ---------------------------------------------------------------- resolution

std::vector<double> expand(const ScheduleSpec& spec, std::size_t T, const std::string& what) {
  if (spec.values.size() == 1) return std::vector<double>(T, spec.values[0]);
  if (spec.values.size() != T) {
    throw ConfigError("'" + what + "' lists " + std::to_string(spec.values.size()) +
                      " values but T = " + std::to_string(T));
  }
  return spec.values;
}

std::optional<BoundCheck> try_bound(ResolvedExperiment& out, const std::string& id, MetricKind metric,
                                    const BoundInputs& in, double scale = 1.0) {
  try {
    return BoundCheck{id, metric, scale * bound_rhs(id, in)};
  } catch (const Error& e) {
    out.skipped_bounds.emplace_back(id, e.what());
    return std::nullopt;
  }
}

MetricKind default_metric(Algorithm algo) {
  switch (algo) {
    case Algorithm::zs_bccg_smooth: return MetricKind::fw_gap;
    case Algorithm::zs_bccg_composite: return MetricKind::gen_fw_gap;
    default: return MetricKind::grad_mapping_sq;
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  const Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError(source + ": config must be a mapping");
  r.allowed_keys(root, "config",
                 {"problem", "solver", "replications", "seed", "metrics", "output", "two_phase"});
  ExperimentConfig c;
  c.source = source;
  if (!root["problem"]) r.fail(root, "'problem' section is required");
  if (!root["solver"]) r.fail(root, "'solver' section is required");
  c.problem = parse_problem(r, root["problem"]);
  c.solver = parse_solver(r, root["solver"]);
  if (root["replications"]) c.replications = r.count(root["replications"], "replications", 1);
  if (root["seed"]) c.seed = r.seed(root["seed"]);
  if (root["metrics"]) {
    const YAML::Node m = root["metrics"];
    if (!m.IsSequence()) r.fail(m, "'metrics' must be a list of metric names");
    for (const auto& item : m) {
      try {
        c.metrics.push_back(parse_metric(r.text(item, "metrics")));
      } catch (const ConfigError& e) {
        r.fail(item, e.what());
      }
    }
  }
  if (root["output"]) c.output_dir = r.text(root["output"], "output");
  if (root["two_phase"]) c.two_phase = parse_two_phase(r, root["two_phase"]);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

ResolvedExperiment resolve_experiment(const ExperimentConfig& config) {
  ResolvedExperiment out;
  out.config = config;
  const SolverSpec& spec = config.solver;
  const Algorithm algo = spec.algo;
  const std::string aname = algorithm_name(algo);

  out.problem = make_problem(config.problem.name, config.problem.n, config.problem.b, config.problem.params);
  const TestProblem& p = *out.problem;
  const double n = static_cast<double>(p.dimension());
  const double b = static_cast<double>(p.num_blocks());
  const double L_f = p.lipschitz(), L_hat = p.lipschitz_max(), L_check = p.lipschitz_min();
  out.sigma = spec.sigma.value_or(p.default_sigma());
  if (!(out.sigma >= 0.0)) throw ConfigError("solver.sigma must be nonnegative");
  out.x1 = p.default_start();

  std::vector<double> probs = spec.block_probs;
  if (probs.empty()) probs.assign(static_cast<std::size_t>(b), 1.0 / b);

  std::optional<double> gap, D_f, D_Phi, D_pX;
  if (auto lower = p.optimal_value_lower_bound()) {
    gap = std::max(0.0, p.composite_value(out.x1) - *lower);
    D_f = distance_D_f(*gap, L_f);
    D_Phi = distance_D_Phi(*gap, L_hat);
  }
  if (auto x_star = p.minimizer(); x_star && probs.size() == static_cast<std::size_t>(b)) {
    D_pX = std::sqrt(weighted_dist_sq(p.layout(), out.x1, *x_star, probs));
  }
  const std::optional<double> M = p.gradient_bound();
  auto need = [&](const std::optional<double>& v, const std::string& what) {
    if (!v) throw ConfigError(aname + " corollary schedule needs " + what + ", which problem '" +
                              p.name() + "' does not declare");
    return *v;
  };

  double D_tilde = 1.0;
  if (spec.D_tilde) {
    D_tilde = *spec.D_tilde;
  } else if (algo == Algorithm::zs_bcd && D_f && *D_f > 0.0) {
    D_tilde = optimal_D_tilde_zs_bcd(L_f, L_hat, *D_f);
  } else if (D_Phi && *D_Phi > 0.0) {
    D_tilde = *D_Phi;
  }

  // Budget-driven schedules fix T' and T.
  std::optional<BudgetSchedule> budget;
  if (spec.budget) {
    if (algo == Algorithm::zs_bmd) {
      budget = schedule_zs_bmd(n, *spec.budget, need(M, "a gradient bound M"), out.sigma,
                               std::max(L_f, L_hat), D_tilde, need(D_Phi, "D_Phi"));
    } else if (algo == Algorithm::zs_bccg_approx) {
      budget = schedule_zs_bccg_approx(n, b, *spec.budget, need(M, "a gradient bound M"), out.sigma,
                                       L_hat, L_check, D_tilde, need(D_Phi, "D_Phi"));
    } else {
      throw ConfigError("solver.budget applies to zs_bmd and zs_bccg_approx only");
    }
    out.derived.emplace_back("budget", *spec.budget);
    out.derived.emplace_back("budget_batch", static_cast<double>(budget->batch));
    out.derived.emplace_back("budget_mu_cap", budget->mu_cap);
    out.derived.emplace_back("budget_iterations", static_cast<double>(budget->iterations));
  }
  std::size_t T = 0;
  if (spec.iterations) {
    T = *spec.iterations;
  } else if (budget) {
    T = budget->iterations;
  } else {
    throw ConfigError("solver.T is required unless solver.budget derives it");
  }
  const double Td = static_cast<double>(T);

  std::optional<ConditionalGradientSchedule> cg;
  if (algo == Algorithm::zs_bccg_smooth || algo == Algorithm::zs_bccg_composite) {
    if (spec.stepsize.rule == "corollary" || spec.batch.rule == "corollary" ||
        spec.mu.rule == "corollary") {
      cg = schedule_zs_bccg_composite(n, Td, need(M, "a gradient bound M"), out.sigma, L_f, L_check);
      out.derived.emplace_back("cg_mu", cg->mu);
      out.derived.emplace_back("cg_alpha", cg->alpha);
      out.derived.emplace_back("cg_batch", cg->batch);
    }
  }
  std::optional<StepSchedule> bcd;
  if (algo == Algorithm::zs_bcd &&
      (spec.stepsize.rule == "corollary" || spec.mu.rule == "corollary")) {
    bcd = schedule_zs_bcd_corollary(n, Td, out.sigma, L_hat, D_tilde, need(D_f, "D_f"));
    out.derived.emplace_back("bcd_alpha", bcd->alpha);
    out.derived.emplace_back("bcd_mu_cap", bcd->mu_cap);
  }
  out.derived.emplace_back("D_tilde", D_tilde);

  SolverConfig& sc = out.solver;
  sc.algo = algo;
  sc.iterations = T;
  sc.block_probs = probs;
  sc.block_lipschitz = p.block_lipschitz();
  sc.global_lipschitz = L_f;
  sc.seed = config.seed;
  sc.max_inner = spec.max_inner;
  sc.full_trajectory_limit = spec.full_trajectory_limit;

  // Stepsizes.
  if (spec.stepsize.empty()) throw ConfigError("solver.stepsize is required");
  if (!spec.stepsize.values.empty()) {
    sc.stepsizes = expand(spec.stepsize, T, "solver.stepsize");
  } else {
    double a = 0.0;
    const std::string& rule = spec.stepsize.rule;
    if (rule == "inverse_L_hat") {
      a = 1.0 / L_hat;
    } else if (rule == "half_inverse_L_hat") {
      a = 0.5 / L_hat;
    } else if (rule == "inverse_sqrt_T") {
      a = 1.0 / std::sqrt(Td);
    } else {  // corollary
      switch (algo) {
        case Algorithm::zs_bcd: a = bcd->alpha; break;
        case Algorithm::zs_bmd: a = 1.0 / L_hat; break;
        case Algorithm::zs_bccg_smooth:
        case Algorithm::zs_bccg_composite: a = cg->alpha; break;
        case Algorithm::zs_bccg_approx: a = 0.5 / L_hat; break;
      }
    }
    sc.stepsizes.assign(T, a);
  }

  // Batch sizes.
  if (algo == Algorithm::zs_bcd) {
    if (!spec.batch.empty() && !(spec.batch.rule.empty() && spec.batch.values.size() == 1 &&
                                 spec.batch.values[0] == 1.0)) {
      throw ConfigError("zs_bcd uses single-sample estimators; solver.batch must be 1 or absent");
    }
    sc.batch_sizes.assign(T, 1);
  } else {
    std::vector<double> batches;
    if (spec.batch.empty()) {
      batches.assign(T, 1.0);
    } else if (!spec.batch.values.empty()) {
      batches = expand(spec.batch, T, "solver.batch");
    } else if (budget) {
      batches.assign(T, static_cast<double>(budget->batch));
    } else if (cg) {
      batches.assign(T, std::ceil(cg->batch));
    } else {
      throw ConfigError("solver.batch 'corollary' for " + aname + " needs solver.budget");
    }
    for (double t : batches) {
      if (!(t >= 1.0) || t != std::floor(t)) {
        throw ConfigError("solver.batch values must be integers >= 1");
      }
      sc.batch_sizes.push_back(static_cast<std::size_t>(t));
    }
  }

  // Smoothing parameter.
  if (spec.mu.empty()) throw ConfigError("solver.mu is required");
  if (!spec.mu.values.empty()) {
    out.mu = spec.mu.values[0];
  } else {
    switch (algo) {
      case Algorithm::zs_bcd: out.mu = bcd->mu_cap; break;
      case Algorithm::zs_bccg_smooth:
      case Algorithm::zs_bccg_composite: out.mu = cg->mu; break;
      case Algorithm::zs_bmd:
      case Algorithm::zs_bccg_approx: {
        double total = 0.0;
        for (std::size_t t : sc.batch_sizes) total += static_cast<double>(t);
        const double Tb = spec.budget ? *spec.budget : total;
        const double ratio = algo == Algorithm::zs_bmd ? 1.0 / Tb : b / Tb;
        out.mu = need(D_Phi, "D_Phi") / (n + 4.0) * std::sqrt(ratio);
        break;
      }
    }
    if (out.mu < kMuFloor) {
      throw ConfigError("derived smoothing parameter " + format_double(out.mu) +
                        " is below the floor 1e-8; set solver.mu explicitly");
    }
  }

  // Approximation parameters.
  if (algo == Algorithm::zs_bccg_approx) {
    if (spec.delta.empty()) throw ConfigError("solver.delta is required for zs_bccg_approx");
    if (!spec.delta.values.empty()) {
      sc.deltas = expand(spec.delta, T, "solver.delta");
    } else {
      sc.deltas.assign(T, 1.0 / (3.0 * Td));
    }
  } else if (!spec.delta.empty()) {
    throw ConfigError("solver.delta applies to zs_bccg_approx only");
  }

  const SmoothedOracle oracle = p.make_oracle(out.mu, out.sigma);
  validate_config(sc, oracle, &p.geometry(), out.x1);

  if (config.two_phase) {
    const TwoPhaseSpec& tp = *config.two_phase;
    TwoPhaseConfig t;
    t.base = sc;
    t.runs = tp.runs;
    t.post_samples = tp.post_samples;
    t.epsilon = tp.epsilon;
    t.Lambda = tp.Lambda;
    if (tp.epsilon && tp.Lambda) {
      const TwoPhaseVariant variant =
          algo == Algorithm::zs_bmd ? TwoPhaseVariant::bmd : TwoPhaseVariant::bccg;
      const TwoPhaseParameters params = two_phase_parameters(
          variant, *tp.epsilon, *tp.Lambda, n, b, need(M, "a gradient bound M"), out.sigma, L_f,
          L_hat, L_check, need(D_Phi, "D_Phi"), D_tilde);
      out.derived.emplace_back("two_phase_runs", static_cast<double>(params.runs));
      out.derived.emplace_back("two_phase_budget", static_cast<double>(params.budget));
      out.derived.emplace_back("two_phase_post_samples", static_cast<double>(params.post_samples));
      if (t.runs == 0) t.runs = params.runs;
      if (t.post_samples == 0) t.post_samples = params.post_samples;
    }
    if (algo != Algorithm::zs_bmd && algo != Algorithm::zs_bccg_approx) {
      throw ConfigError("two_phase wraps zs_bmd or zs_bccg_approx, not " + aname);
    }
    out.two_phase = t;
  }

  // Metrics and bounds.
  out.metrics = config.metrics;
  if (out.metrics.empty()) out.metrics.push_back(default_metric(algo));

  BoundInputs in;
  in.n = n;
  in.b = b;
  in.T = Td;
  in.mu = out.mu;
  in.sigma = out.sigma;
  in.M = M;
  in.L_f = L_f;
  in.L_hat = L_hat;
  in.L_check = L_check;
  in.D_f = D_f;
  in.D_Phi = D_Phi;
  in.D_pX = D_pX;
  in.D_tilde = D_tilde;
  in.gap = gap;
  in.alphas = sc.stepsizes;
  for (std::size_t t : sc.batch_sizes) in.batches.push_back(static_cast<double>(t));
  in.deltas = sc.deltas;
  in.probs = sc.block_probs;
  in.block_lipschitz = sc.block_lipschitz;
  if (p.geometry().bounded()) in.block_diameters = p.geometry().diameters();

  std::vector<std::optional<BoundCheck>> checks;
  if (out.two_phase) {
    out.skipped_bounds.emplace_back("*", "single-run bounds do not apply to the two-phase output");
  } else {
    switch (algo) {
      case Algorithm::zs_bcd:
        checks.push_back(try_bound(out, "zs_bcd_nonconvex", MetricKind::grad_mapping_sq, in, L_f));
        if (p.convex()) {
          checks.push_back(try_bound(out, "zs_bcd_convex", MetricKind::suboptimality, in));
        }
        break;
      case Algorithm::zs_bmd:
        checks.push_back(try_bound(out, "zs_bmd_general", MetricKind::grad_mapping_sq, in));
        break;
      case Algorithm::zs_bccg_smooth:
        checks.push_back(try_bound(out, "zs_bccg_smooth_gap", MetricKind::fw_gap, in));
        break;
      case Algorithm::zs_bccg_composite:
        checks.push_back(try_bound(out, "zs_bccg_composite_gap", MetricKind::gen_fw_gap, in));
        break;
      case Algorithm::zs_bccg_approx:
        checks.push_back(try_bound(out, "zs_bccg_approx_general", MetricKind::grad_mapping_sq, in));
        break;
    }
  }
  for (auto& c : checks) {
    if (!c) continue;
    out.bounds.push_back(*c);
    if (std::find(out.metrics.begin(), out.metrics.end(), c->metric) == out.metrics.end()) {
      out.metrics.push_back(c->metric);
    }
  }
  for (MetricKind kind : out.metrics) {
    try {
      (void)evaluate_metric(p, kind, out.x1, sc.stepsizes[0], sc.block_probs, 0);
    } catch (const Error& e) {
      throw ConfigError("metric '" + metric_name(kind) + "' is unavailable: " + e.what());
    }
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string describe(const ResolvedExperiment& r) {
  const SolverConfig& c = r.solver;
  std::ostringstream os;
  os << "problem " << r.problem->name() << " n=" << r.problem->dimension()
     << " b=" << r.problem->num_blocks() << "\n";
  os << "solver " << algorithm_name(c.algo) << " T=" << c.iterations << "\n";
  const auto [amin, amax] = std::minmax_element(c.stepsizes.begin(), c.stepsizes.end());
  os << "alpha " << format_double(*amin);
  if (*amax != *amin) os << " .. " << format_double(*amax);
  os << "\n";
  std::size_t total = 0;
  for (std::size_t t : c.batch_sizes) total += t;
  os << "batch T'=" << (c.batch_sizes.empty() ? 1 : c.batch_sizes.front())
     << " sum T_k=" << total << "\n";
  os << "mu " << format_double(r.mu) << " sigma " << format_double(r.sigma) << "\n";
  for (const auto& [key, value] : r.derived) os << key << " " << format_double(value) << "\n";
  const OutputDistribution d = output_weights(c, r.problem->dimension());
  double mean = 0.0;
  for (std::size_t k = 0; k < d.weights.size(); ++k) mean += static_cast<double>(k + 1) * d.weights[k];
  const auto [wmin, wmax] = std::minmax_element(d.weights.begin(), d.weights.end());
  os << "P_R min " << format_double(*wmin) << " max " << format_double(*wmax) << " E[R] "
     << format_double(mean) << "\n";
  if (r.two_phase) {
    os << "two_phase S=" << r.two_phase->runs << " post_samples=" << r.two_phase->post_samples << "\n";
  }
  for (const auto& bc : r.bounds) {
    os << "bound " << bc.id << " on " << metric_name(bc.metric) << " = " << format_double(bc.value)
       << "\n";
  }
  for (const auto& [id, why] : r.skipped_bounds) os << "bound " << id << " skipped: " << why << "\n";
  return os.str();
}

namespace {

struct ReplicationResult {
  std::uint64_t seed = 0;
  std::optional<std::string> error;
  std::string csv;
  std::size_t R = 0;
  std::map<std::string, double> output_metrics;
  std::uint64_t calls = 0;
  std::uint64_t expected_calls = 0;
};

std::uint64_t expected_calls(const SolverConfig& c) {
  std::uint64_t total = 0;
  for (std::size_t t : c.batch_sizes) total += 2 * t;
  if (c.batch_sizes.empty()) total = 2 * c.iterations;
  return total;
}

ReplicationResult run_single(const ResolvedExperiment& r, std::uint64_t seed) {
  ReplicationResult out;
  out.seed = seed;
  const TestProblem& p = *r.problem;
  const SmoothedOracle oracle = p.make_oracle(r.mu, r.sigma);
  std::ostringstream csv;
  if (r.two_phase) {
    TwoPhaseConfig tp = *r.two_phase;
    tp.base.seed = seed;
    tp.jobs = 1;
    const TwoPhaseResult res = two_phase(oracle, p.geometry(), r.x1, tp);
    csv << "candidate,score,selected";
    for (MetricKind k : r.metrics) csv << ",metric:" << metric_name(k);
    csv << ",oracle_calls\n";
    for (std::size_t i = 0; i < res.candidates.size(); ++i) {
      csv << i << "," << format_double(res.scores[i]) << "," << (i == res.selected ? 1 : 0);
      for (MetricKind k : r.metrics) {
        csv << "," << format_double(evaluate_metric(p, k, res.candidates[i], res.alphas[i],
                                                    tp.base.block_probs, 0));
      }
      csv << "," << res.run_calls[i] << "\n";
    }
    out.R = res.selected + 1;
    for (MetricKind k : r.metrics) {
      out.output_metrics[metric_name(k)] =
          evaluate_metric(p, k, res.x_star, res.alphas[res.selected], tp.base.block_probs, 0);
    }
    out.calls = res.oracle_calls;
    out.expected_calls =
        tp.runs * (expected_calls(tp.base) + 2 * static_cast<std::uint64_t>(tp.post_samples));
  } else {
    SolverConfig c = r.solver;
    c.seed = seed;
    RunReport report = solve(oracle, p.geometry(), r.x1, c);
    record_metrics(report, p, r.metrics, c);
    csv << "iter,block";
    for (MetricKind k : r.metrics) csv << ",metric:" << metric_name(k);
    csv << ",oracle_calls\n";
    for (std::size_t i = 0; i < report.trajectory.size(); ++i) {
      const std::size_t j = report.iterate_index[i];
      csv << j << "," << (j == 1 ? Index(-1) : report.blocks[j - 2]);
      for (MetricKind k : r.metrics) csv << "," << format_double(report.metrics[metric_name(k)][i]);
      csv << "," << (j == 1 ? 0 : report.cumulative_calls[j - 2]) << "\n";
    }
    out.R = report.R;
    const Index block = report.blocks[std::min(report.R, c.iterations) - 1];
    for (MetricKind k : r.metrics) {
      out.output_metrics[metric_name(k)] =
          evaluate_metric(p, k, report.x_R, report.alpha_R, c.block_probs, block);
    }
    out.calls = report.oracle_calls;
    out.expected_calls = expected_calls(c);
  }
  out.csv = csv.str();
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

json schedule_json(const std::vector<double>& v) {
  if (!v.empty() && std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) {
    return v.front();
  }
  return v;
}

json manifest_json(const ResolvedExperiment& r, std::size_t replications) {
  const ExperimentConfig& c = r.config;
  const TestProblem& p = *r.problem;
  const SolverConfig& s = r.solver;
  json m;
  m["problem"] = {{"name", c.problem.name}, {"n", c.problem.n}, {"b", c.problem.b},
                  {"params", c.problem.params}};
  json constants = {{"L_f", p.lipschitz()}, {"L_s", p.block_lipschitz()},
                    {"L_hat", p.lipschitz_max()}, {"L_check", p.lipschitz_min()}};
  if (auto M = p.gradient_bound()) constants["M"] = *M;
  if (auto f = p.optimal_value()) constants["optimal_value"] = *f;
  if (auto f = p.optimal_value_lower_bound()) constants["optimal_value_lower_bound"] = *f;
  m["problem"]["constants"] = constants;
  json solver = {{"algo", algorithm_name(s.algo)},
                 {"T", s.iterations},
                 {"stepsize", schedule_json(s.stepsizes)},
                 {"mu", r.mu},
                 {"sigma", r.sigma},
                 {"block_probs", s.block_probs},
                 {"max_inner", s.max_inner},
                 {"trajectory_limit", s.full_trajectory_limit}};
  std::vector<double> batches(s.batch_sizes.begin(), s.batch_sizes.end());
  solver["batch"] = schedule_json(batches);
  if (!s.deltas.empty()) solver["delta"] = schedule_json(s.deltas);
  m["solver"] = solver;
  json derived = json::object();
  for (const auto& [key, value] : r.derived) derived[key] = value;
  m["derived"] = derived;
  if (r.two_phase) {
    json tp = {{"runs", r.two_phase->runs}, {"post_samples", r.two_phase->post_samples}};
    if (r.two_phase->epsilon) tp["epsilon"] = *r.two_phase->epsilon;
    if (r.two_phase->Lambda) tp["Lambda"] = *r.two_phase->Lambda;
    m["two_phase"] = tp;
  }
  m["seed"] = c.seed;
  m["replications"] = replications;
  std::vector<std::string> metrics;
  for (MetricKind k : r.metrics) metrics.push_back(metric_name(k));
  m["metrics"] = metrics;
  m["start"] = std::vector<double>(r.x1.data(), r.x1.data() + r.x1.size());
  return m;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

ExperimentOutcome run_experiment(const ResolvedExperiment& r, const RunOptions& options) {
  namespace fs = std::filesystem;
  const std::size_t reps = options.seeds.value_or(r.config.replications);
  if (reps < 1) throw ConfigError("at least one replication is required");
  const fs::path dir(options.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());

  std::vector<ReplicationResult> results(reps);
  parallel_for(reps, options.jobs, [&](std::size_t i) {
    const std::uint64_t seed = r.config.seed + i;
    try {
      results[i] = run_single(r, seed);
    } catch (const Error& e) {
      results[i] = ReplicationResult{};
      results[i].seed = seed;
      results[i].error = e.what();
    }
  });

  ExperimentOutcome outcome;
  outcome.replications = reps;
  const std::string prefix = r.two_phase ? "candidates_" : "trajectory_";
  for (const auto& res : results) {
    if (res.error) {
      ++outcome.failed_replications;
      continue;
    }
    const fs::path path = dir / (prefix + std::to_string(res.seed) + ".csv");
    write_file(path, res.csv);
    outcome.files.push_back(path.string());
  }

  write_file(dir / "manifest.json", manifest_json(r, reps).dump(2) + "\n");
  outcome.files.push_back((dir / "manifest.json").string());

  json summary;
  summary["replications"] = reps;
  summary["failed_replications"] = outcome.failed_replications;
  json metrics = json::object();
  std::map<std::string, std::pair<double, std::size_t>> means;
  for (MetricKind k : r.metrics) {
    const std::string name = metric_name(k);
    std::vector<double> values;
    for (const auto& res : results) {
      if (!res.error) values.push_back(res.output_metrics.at(name));
    }
    double mean = 0.0, var = 0.0;
    for (double v : values) mean += v;
    if (!values.empty()) mean /= static_cast<double>(values.size());
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
    metrics[name] = {{"mean", number_or_null(values.empty() ? NAN : mean)},
                     {"stddev", number_or_null(values.empty() ? NAN : sd)},
                     {"seeds", values.size()}};
    means[name] = {mean, values.size()};
  }
  summary["output_metrics"] = metrics;
  json bounds = json::array();
  for (const auto& bc : r.bounds) {
    const auto& [mean, count] = means.at(metric_name(bc.metric));
    const bool pass = count > 0 && mean <= bc.value;
    outcome.bounds_passed = outcome.bounds_passed && pass;
    bounds.push_back({{"id", bc.id},
                      {"metric", metric_name(bc.metric)},
                      {"bound", number_or_null(bc.value)},
                      {"empirical_mean", number_or_null(count ? mean : NAN)},
                      {"seeds", count},
                      {"pass", pass}});
  }
  summary["bounds"] = bounds;
  json skipped = json::array();
  for (const auto& [id, why] : r.skipped_bounds) skipped.push_back({{"id", id}, {"reason", why}});
  summary["skipped_bounds"] = skipped;
  json runs = json::array();
  for (const auto& res : results) {
    json run = {{"seed", res.seed}};
    if (res.error) {
      run["error"] = *res.error;
    } else {
      run["R"] = res.R;
      json om = json::object();
      for (const auto& [name, v] : res.output_metrics) om[name] = number_or_null(v);
      run["metrics"] = om;
      run["oracle_calls"] = res.calls;
      run["expected_oracle_calls"] = res.expected_calls;
    }
    runs.push_back(run);
  }
  summary["runs"] = runs;
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  outcome.files.push_back((dir / "summary.json").string());

  if (options.gnuplot_stub) {
    std::ostringstream gp;
    const std::string metric = metric_name(r.metrics.front());
    gp << "set datafile separator ','\nset key autotitle columnhead\nset logscale y\n"
       << "set xlabel 'iteration'\nset ylabel '" << metric << "'\nplot \\\n";
    bool first = true;
    for (const auto& res : results) {
      if (res.error || r.two_phase) continue;
      if (!first) gp << ", \\\n";
      first = false;
      gp << "  'trajectory_" << res.seed << ".csv' using 'iter':'metric:" << metric
         << "' with lines title 'seed " << res.seed << "'";
    }
    gp << "\n";
    write_file(dir / "plot.gp", gp.str());
    outcome.files.push_back((dir / "plot.gp").string());
  }
  return outcome;
}

}  // namespace zoblock
