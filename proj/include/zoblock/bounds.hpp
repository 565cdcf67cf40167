#pragma once

#include <optional>
#include <string>
#include <vector>

namespace zoblock {

// Constants consumed by the bound evaluators. Unset constants raise a
// ConfigError naming the constant when a bound needs them. Derived constants
// (sigma_tilde_sq, L_tilde, omega, C_T, gamma/kappa factors) are always
// recomputed from the primary ones.
struct BoundInputs {
  std::optional<double> n, b;
  std::optional<double> T;            // iterations
  std::optional<double> T_batch;      // T', constant batch size
  std::optional<double> T_budget;     // total oracle budget per run
  std::optional<double> post_samples; // post-optimization sample size
  std::optional<double> mu, sigma, M;
  std::optional<double> L_f, L_hat, L_check;
  std::optional<double> D_f;      // sqrt(2 (f(x1) - f*) / L_f)
  std::optional<double> D_Phi;    // sqrt((Phi(x1) - Phi*) / L_hat)
  std::optional<double> D_pX;     // sqrt(sum_s ||x1_s - x*_s||^2 / p_s)
  std::optional<double> D_tilde;
  std::optional<double> gap;      // f(x1) - f* or Phi(x1) - Phi*
  std::optional<double> grad_norm_sq;
  std::optional<double> S, lambda;

  // Per-iteration schedules and per-block data for the general-schedule bounds.
  std::vector<double> alphas, batches, deltas;
  std::vector<double> probs, block_lipschitz, block_diameters;

  double need(const std::optional<double>& v, const char* name) const;
  const std::vector<double>& need(const std::vector<double>& v, const char* name) const;

  double sigma_tilde_sq() const;  // 4(n+4)[2M^2 + sigma^2 + mu^2 L_f^2 (n+4)^2]
  double L_tilde() const;         // max(L_f, L_hat)
  double omega() const;           // L_hat / L_check + 2
  double C_frak() const;          // 4(n+4)(2M^2 + sigma^2 + D_Phi^2 L_f^2 b / T_budget)
  double gamma1() const;
  double gamma2() const;
  double kappa1() const;
  double kappa2() const;
};

const std::vector<std::string>& bound_ids();

// Right-hand side of the named bound. Ids and what they bound:
//   smoothing_value_gap          |f_mu(x) - f(x)|
//   smoothing_grad_bias          ||grad f_mu(x) - grad f(x)||
//   estimator_second_moment      E||G_mu(x)||^2 (noiseless)
//   zs_bcd_nonconvex             E||grad f(x_R)||^2 / L_f, general schedule
//   zs_bcd_corollary_rate        E||grad f(x_R)||^2 = b L_f B_T
//   zs_bcd_convex                E[f(x_R) - f*], general schedule
//   zs_bcd_convex_order          order-of-magnitude form with unit constants
//   zs_bmd_general               E||P(x_R)||^2, general schedule
//   zs_bmd_uniform               E||P(x_R)||^2, alpha = 1/L_hat, uniform p, T_k = T'
//   zs_bmd_budget_rate           E||P(x_R)||^2 = L_tilde b B_T for a budget T_budget
//   two_phase_bmd_threshold      level exceeded with prob <= (S+1)/lambda + 2^-S
//   zs_bccg_smooth_gap           E[g_X^R], smooth problems
//   zs_bccg_composite_gap        E[generalized gap at z_R]
//   zs_bccg_approx_general       E||P(x_R)||^2, general schedule
//   zs_bccg_approx_uniform       E||P(x_R)||^2, alpha = 1/(2 L_hat), delta = 1/(3T)
//   zs_bccg_approx_budget_rate   E||P(x_R)||^2 = omega b C_T for a budget T_budget
//   two_phase_bccg_threshold     as two_phase_bmd_threshold with omega C_T
double bound_rhs(const std::string& id, const BoundInputs& in);

double rate_B_T(const BoundInputs& in);          // zs_bcd corollary
double rate_B_budget(const BoundInputs& in);     // zs_bmd budget corollary
double rate_C_budget(const BoundInputs& in);     // approximate zs_bccg budget corollary

// (S + 1) / lambda + 2^-S.
double two_phase_failure_probability(double S, double lambda);

// D_f = sqrt(2 gap / L_f), D_Phi = sqrt(gap / L_hat).
double distance_D_f(double gap, double L_f);
double distance_D_Phi(double gap, double L_hat);

}  // namespace zoblock
