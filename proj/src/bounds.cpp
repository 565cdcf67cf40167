#include "zoblock/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "zoblock/errors.hpp"

namespace zoblock {

namespace {

double sum(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc;
}

double sum_sq(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

double positive_denominator(double d, const std::string& id) {
  if (!(d > 0.0)) {
    throw AdmissibilityError("bound '" + id + "' has a nonpositive denominator; the stepsizes "
                             "violate the theorem's admissibility condition");
  }
  return d;
}

void check_block_data(const BoundInputs& in, bool need_diameters) {
  const auto& p = in.need(in.probs, "probs");
  const auto& L = in.need(in.block_lipschitz, "block_lipschitz");
  if (p.size() != L.size()) throw ConfigError("probs and block_lipschitz differ in length");
  if (need_diameters && in.need(in.block_diameters, "block_diameters").size() != p.size()) {
    throw ConfigError("block_diameters and probs differ in length");
  }
}

void check_schedule(const BoundInputs& in, bool need_batches, bool need_deltas) {
  const auto& a = in.need(in.alphas, "alphas");
  if (need_batches && in.need(in.batches, "batches").size() != a.size()) {
    throw ConfigError("batches and alphas differ in length");
  }
  if (need_deltas && in.need(in.deltas, "deltas").size() != a.size()) {
    throw ConfigError("deltas and alphas differ in length");
  }
}

double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }
double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

// ------------------------------------------------------------ lemma bounds

double smoothing_value_gap(const BoundInputs& in) {
  const double mu = in.need(in.mu, "mu");
  return 0.5 * mu * mu * in.need(in.L_f, "L_f") * in.need(in.n, "n");
}

double smoothing_grad_bias(const BoundInputs& in) {
  const double n = in.need(in.n, "n");
  return 0.5 * in.need(in.mu, "mu") * in.need(in.L_f, "L_f") * std::pow(n + 3.0, 1.5);
}

double estimator_second_moment(const BoundInputs& in) {
  const double n = in.need(in.n, "n"), mu = in.need(in.mu, "mu"), L = in.need(in.L_f, "L_f");
  return 0.5 * mu * mu * L * L * std::pow(n + 6.0, 3) +
         2.0 * (n + 4.0) * in.need(in.grad_norm_sq, "grad_norm_sq");
}

// ----------------------------------------------------------------- zs_bcd

double zs_bcd_nonconvex(const BoundInputs& in) {
  check_schedule(in, false, false);
  check_block_data(in, false);
  const double n = in.need(in.n, "n"), mu = in.need(in.mu, "mu"), sigma = in.need(in.sigma, "sigma");
  const double L_f = in.need(in.L_f, "L_f"), D_f = in.need(in.D_f, "D_f");
  const double p_min = min_of(in.probs);
  double pL_max = 0.0;
  for (std::size_t s = 0; s < in.probs.size(); ++s) {
    pL_max = std::max(pL_max, in.probs[s] * in.block_lipschitz[s]);
  }
  double denom = 0.0, mixed = 0.0;
  for (double a : in.alphas) {
    denom += a * (p_min - 2.0 * (n + 4.0) * pL_max * a);
    mixed += p_min / 4.0 * a + pL_max * a * a;
  }
  positive_denominator(denom, "zs_bcd_nonconvex");
  const double num = D_f * D_f + 2.0 * (pL_max / L_f) * (n + 4.0) * sigma * sigma * sum_sq(in.alphas) +
                     2.0 * mu * mu * (n + 4.0) * (1.0 + L_f * (n + 4.0) * (n + 4.0) * mixed);
  return num / denom;
}

double zs_bcd_corollary_rate(const BoundInputs& in) {
  return in.need(in.b, "b") * in.need(in.L_f, "L_f") * rate_B_T(in);
}

double zs_bcd_convex(const BoundInputs& in) {
  check_schedule(in, false, false);
  const double n = in.need(in.n, "n"), mu = in.need(in.mu, "mu"), sigma = in.need(in.sigma, "sigma");
  const double L_f = in.need(in.L_f, "L_f"), D = in.need(in.D_pX, "D_pX");
  double denom = 0.0;
  for (double a : in.alphas) denom += a - 4.0 * (n + 5.0) * L_f * a * a;
  denom = 2.0 * positive_denominator(denom, "zs_bcd_convex");
  const double m2 = mu * mu, L2 = L_f * L_f;
  const double num = D * D + 2.0 * m2 * L_f * (n + 5.0) * sum(in.alphas) +
                     8.0 * (n + 5.0) *
                         (m2 * L2 * std::pow(n + 5.0, 3) + m2 * L2 * (n + 5.0) + sigma * sigma) *
                         sum_sq(in.alphas);
  return num / denom;
}

double zs_bcd_convex_order(const BoundInputs& in) {
  const double n = in.need(in.n, "n"), T = in.need(in.T, "T"), D = in.need(in.D_pX, "D_pX");
  return in.need(in.sigma, "sigma") * D * std::sqrt(n) / std::sqrt(T) +
         n * D * D * in.need(in.L_f, "L_f") / T;
}

// ----------------------------------------------------------------- zs_bmd

double zs_bmd_general(const BoundInputs& in) {
  check_schedule(in, true, false);
  check_block_data(in, false);
  const double n = in.need(in.n, "n"), mu = in.need(in.mu, "mu"), L_f = in.need(in.L_f, "L_f");
  // Phi_mu(x1) - Phi_mu* <= Phi(x1) - Phi* + mu^2 L_f n.
  const double smoothed_gap = in.need(in.gap, "gap") + mu * mu * L_f * n;
  const double st2 = in.sigma_tilde_sq();
  double denom = 0.0, noise = 0.0;
  for (std::size_t k = 0; k < in.alphas.size(); ++k) {
    const double a = in.alphas[k];
    double m = INFINITY;
    for (std::size_t s = 0; s < in.probs.size(); ++s) {
      m = std::min(m, in.probs[s] * (1.0 - in.block_lipschitz[s] / 2.0 * a));
    }
    denom += a * m;
    noise += a / in.batches[k];
  }
  positive_denominator(denom, "zs_bmd_general");
  return (4.0 * smoothed_gap + 8.0 * max_of(in.probs) * st2 * noise) / denom +
         0.5 * mu * mu * L_f * L_f * std::pow(n + 3.0, 3);
}

double zs_bmd_uniform(const BoundInputs& in) {
  const double n = in.need(in.n, "n"), b = in.need(in.b, "b"), T = in.need(in.T, "T");
  const double Tp = in.need(in.T_batch, "T_batch"), mu = in.need(in.mu, "mu");
  const double L_f = in.need(in.L_f, "L_f"), Lh = in.need(in.L_hat, "L_hat");
  const double D = in.need(in.D_Phi, "D_Phi");
  return (8.0 * b * Lh * Lh * D * D + 8.0 * mu * mu * L_f * L_f * n * b) / T +
         16.0 * in.sigma_tilde_sq() * b / Tp + 0.5 * mu * mu * L_f * L_f * std::pow(n + 3.0, 3);
}

double zs_bmd_budget_rate(const BoundInputs& in) {
  return in.L_tilde() * in.need(in.b, "b") * rate_B_budget(in);
}

double two_phase_tail(const BoundInputs& in) {
  const double n = in.need(in.n, "n"), b = in.need(in.b, "b");
  const double Tb = in.need(in.T_budget, "T_budget"), L_f = in.need(in.L_f, "L_f");
  const double D = in.need(in.D_Phi, "D_Phi"), M = in.need(in.M, "M"), sigma = in.need(in.sigma, "sigma");
  const double lambda = in.need(in.lambda, "lambda"), post = in.need(in.post_samples, "post_samples");
  return 3.0 * D * D * L_f * L_f * b * (n + 4.0) / Tb +
         32.0 * (n + 4.0) * lambda / post * (2.0 * M * M + sigma * sigma + D * D * L_f * L_f * b / Tb);
}

double two_phase_bmd_threshold(const BoundInputs& in) {
  return 16.0 * in.need(in.b, "b") * in.L_tilde() * rate_B_budget(in) + two_phase_tail(in);
}

// ---------------------------------------------------------------- zs_bccg

double zs_bccg_gap(const BoundInputs& in, const char* id) {
  check_schedule(in, true, false);
  check_block_data(in, true);
  const double n = in.need(in.n, "n"), mu = in.need(in.mu, "mu"), L_f = in.need(in.L_f, "L_f");
  const double st2 = in.sigma_tilde_sq();
  double pLD = 0.0, p_over_L = 0.0;
  for (std::size_t s = 0; s < in.probs.size(); ++s) {
    pLD += in.probs[s] * in.block_lipschitz[s] * in.block_diameters[s];
    p_over_L = std::max(p_over_L, in.probs[s] / in.block_lipschitz[s]);
  }
  const double bias = 0.25 * mu * mu * L_f * L_f * std::pow(n + 3.0, 3);
  double noise = 0.0;
  for (double Tk : in.batches) noise += st2 / Tk + bias;
  const double denom = positive_denominator(min_of(in.probs) * sum(in.alphas), id);
  return (in.need(in.gap, "gap") + pLD * sum_sq(in.alphas) + p_over_L * noise) / denom;
}

double zs_bccg_approx_general(const BoundInputs& in) {
  check_schedule(in, true, true);
  check_block_data(in, false);
  const double n = in.need(in.n, "n"), mu = in.need(in.mu, "mu"), L_f = in.need(in.L_f, "L_f");
  const double st2 = in.sigma_tilde_sq();
  const double bias = 0.5 * mu * mu * L_f * L_f * std::pow(n + 3.0, 3);
  double denom = 0.0, noise = 0.0;
  for (std::size_t k = 0; k < in.alphas.size(); ++k) {
    const double a = in.alphas[k];
    double lo = INFINITY, hi = 0.0;
    for (std::size_t s = 0; s < in.probs.size(); ++s) {
      const double p = in.probs[s], L = in.block_lipschitz[s];
      lo = std::min(lo, p * (1.0 - L * a));
      hi = std::max(hi, p * (1.0 / L + 4.0 * a));
    }
    denom += a * lo;
    noise += hi * (2.0 * st2 / in.batches[k] + bias);
  }
  positive_denominator(denom, "zs_bccg_approx_general");
  return (2.0 * in.need(in.gap, "gap") + 6.0 * sum(in.deltas) + noise) / denom;
}

double zs_bccg_approx_uniform(const BoundInputs& in) {
  const double n = in.need(in.n, "n"), b = in.need(in.b, "b"), T = in.need(in.T, "T");
  const double Tp = in.need(in.T_batch, "T_batch"), mu = in.need(in.mu, "mu");
  const double L_f = in.need(in.L_f, "L_f"), Lh = in.need(in.L_hat, "L_hat");
  const double Lc = in.need(in.L_check, "L_check"), D = in.need(in.D_Phi, "D_Phi");
  return (4.0 * b * Lh * Lh * D * D + 4.0 * b * Lh) / T +
         (4.0 * Lh / Lc + 8.0) * in.sigma_tilde_sq() / Tp +
         (Lh / Lc + 2.0) * mu * mu * L_f * L_f * std::pow(n + 3.0, 3);
}

double zs_bccg_approx_budget_rate(const BoundInputs& in) {
  return in.omega() * in.need(in.b, "b") * rate_C_budget(in);
}

double two_phase_bccg_threshold(const BoundInputs& in) {
  return 16.0 * in.need(in.b, "b") * in.omega() * rate_C_budget(in) + two_phase_tail(in);
}

using Evaluator = std::function<double(const BoundInputs&)>;

const std::map<std::string, Evaluator>& registry() {
  static const std::map<std::string, Evaluator> table{
      {"smoothing_value_gap", smoothing_value_gap},
      {"smoothing_grad_bias", smoothing_grad_bias},
      {"estimator_second_moment", estimator_second_moment},
      {"zs_bcd_nonconvex", zs_bcd_nonconvex},
      {"zs_bcd_corollary_rate", zs_bcd_corollary_rate},
      {"zs_bcd_convex", zs_bcd_convex},
      {"zs_bcd_convex_order", zs_bcd_convex_order},
      {"zs_bmd_general", zs_bmd_general},
      {"zs_bmd_uniform", zs_bmd_uniform},
      {"zs_bmd_budget_rate", zs_bmd_budget_rate},
      {"two_phase_bmd_threshold", two_phase_bmd_threshold},
      {"zs_bccg_smooth_gap", [](const BoundInputs& in) { return zs_bccg_gap(in, "zs_bccg_smooth_gap"); }},
      {"zs_bccg_composite_gap", [](const BoundInputs& in) { return zs_bccg_gap(in, "zs_bccg_composite_gap"); }},
      {"zs_bccg_approx_general", zs_bccg_approx_general},
      {"zs_bccg_approx_uniform", zs_bccg_approx_uniform},
      {"zs_bccg_approx_budget_rate", zs_bccg_approx_budget_rate},
      {"two_phase_bccg_threshold", two_phase_bccg_threshold},
  };
  return table;
}

}  // namespace

double BoundInputs::need(const std::optional<double>& v, const char* name) const {
  if (!v) throw ConfigError(std::string("bound needs constant '") + name + "'");
  return *v;
}

const std::vector<double>& BoundInputs::need(const std::vector<double>& v, const char* name) const {
  if (v.empty()) throw ConfigError(std::string("bound needs sequence '") + name + "'");
  return v;
}

double BoundInputs::sigma_tilde_sq() const {
  const double nn = need(n, "n"), m = need(mu, "mu"), L = need(L_f, "L_f");
  const double MM = need(M, "M"), s = need(sigma, "sigma");
  return 4.0 * (nn + 4.0) * (2.0 * MM * MM + s * s + m * m * L * L * (nn + 4.0) * (nn + 4.0));
}

double BoundInputs::L_tilde() const { return std::max(need(L_f, "L_f"), need(L_hat, "L_hat")); }

double BoundInputs::omega() const { return need(L_hat, "L_hat") / need(L_check, "L_check") + 2.0; }

double BoundInputs::C_frak() const {
  const double nn = need(n, "n"), MM = need(M, "M"), s = need(sigma, "sigma");
  const double D = need(D_Phi, "D_Phi"), L = need(L_f, "L_f");
  return 4.0 * (nn + 4.0) *
         (2.0 * MM * MM + s * s + D * D * L * L * need(b, "b") / need(T_budget, "T_budget"));
}

namespace {
double noise_root(const BoundInputs& in) {
  const double M = in.need(in.M, "M"), s = in.need(in.sigma, "sigma");
  return std::sqrt((in.need(in.n, "n") + 4.0) * (2.0 * M * M + s * s));
}
}  // namespace

double BoundInputs::gamma1() const {
  return std::max(noise_root(*this) / (L_tilde() * need(D_tilde, "D_tilde") *
                                       std::sqrt(need(T_budget, "T_budget"))),
                  1.0);
}

double BoundInputs::gamma2() const {
  return std::max((need(n, "n") + 4.0) / need(T_budget, "T_budget"), 1.0);
}

double BoundInputs::kappa1() const {
  return std::max(omega() * noise_root(*this) /
                      (need(D_tilde, "D_tilde") * std::sqrt(need(T_budget, "T_budget"))),
                  1.0);
}

double BoundInputs::kappa2() const {
  return std::max(omega() * (need(n, "n") + 4.0) / need(T_budget, "T_budget"), 1.0);
}

const std::vector<std::string>& bound_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (const auto& [id, fn] : registry()) out.push_back(id);
    return out;
  }();
  return ids;
}

double bound_rhs(const std::string& id, const BoundInputs& in) {
  auto it = registry().find(id);
  if (it == registry().end()) throw ConfigError("unknown bound '" + id + "'");
  return it->second(in);
}

double rate_B_T(const BoundInputs& in) {
  const double n = in.need(in.n, "n"), T = in.need(in.T, "T"), sigma = in.need(in.sigma, "sigma");
  const double L_f = in.need(in.L_f, "L_f"), Lh = in.need(in.L_hat, "L_hat");
  const double Dt = in.need(in.D_tilde, "D_tilde"), D_f = in.need(in.D_f, "D_f");
  return 2.0 * sigma * std::sqrt(n + 4.0) / std::sqrt(T) *
             (2.0 * Lh / L_f * Dt + 3.0 * D_f * D_f / Dt) +
         D_f * D_f * (24.0 * Lh + 2.0 * L_f) * (n + 4.0) / T;
}

double rate_B_budget(const BoundInputs& in) {
  const double n = in.need(in.n, "n"), Tb = in.need(in.T_budget, "T_budget");
  const double Dt = in.need(in.D_tilde, "D_tilde"), D = in.need(in.D_Phi, "D_Phi");
  return 64.0 * noise_root(in) / std::sqrt(Tb) * (Dt * in.gamma1() + D * D / Dt) +
         (64.0 * in.gamma2() + 33.0) * in.L_tilde() * D * D * (n + 4.0) / Tb;
}

double rate_C_budget(const BoundInputs& in) {
  const double n = in.need(in.n, "n"), Tb = in.need(in.T_budget, "T_budget");
  const double Dt = in.need(in.D_tilde, "D_tilde"), D = in.need(in.D_Phi, "D_Phi");
  const double Lh = in.need(in.L_hat, "L_hat"), L_f = in.need(in.L_f, "L_f");
  const double curvature = Lh * Lh * D * D + Lh;
  return 8.0 * noise_root(in) / std::sqrt(Tb) * (2.0 * in.kappa1() * Dt + curvature / Dt) +
         ((16.0 * in.kappa2() + 1.0) * L_f * L_f * D * D + 8.0 * curvature) * (n + 4.0) / Tb;
}

double two_phase_failure_probability(double S, double lambda) {
  return (S + 1.0) / lambda + std::pow(2.0, -S);
}

double distance_D_f(double gap, double L_f) { return std::sqrt(2.0 * std::max(gap, 0.0) / L_f); }

double distance_D_Phi(double gap, double L_hat) { return std::sqrt(std::max(gap, 0.0) / L_hat); }

}  // namespace zoblock
