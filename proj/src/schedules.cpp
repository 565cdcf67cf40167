#include "zoblock/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zoblock/errors.hpp"

namespace zoblock {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string("schedule input '") + name + "' must be positive and finite");
  }
}

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string("schedule input '") + name + "' must be nonnegative");
  }
}

// D~ / (sigma sqrt T), infinite when sigma = 0.
double noise_branch(double D_tilde, double sigma, double T) {
  if (sigma == 0.0) return std::numeric_limits<double>::infinity();
  return D_tilde / (sigma * std::sqrt(T));
}

std::size_t ceil_count(double v) {
  if (!(v < 1.8e19)) throw ConfigError("schedule value overflows a 64-bit count");
  return static_cast<std::size_t>(std::ceil(v));
}

}  // namespace

StepSchedule schedule_zs_bcd_corollary(double n, double T, double sigma, double L_hat,
                                       double D_tilde, double D_f) {
  require_positive(n, "n");
  require_positive(T, "T");
  require_nonnegative(sigma, "sigma");
  require_positive(L_hat, "L_hat");
  require_positive(D_tilde, "D_tilde");
  require_nonnegative(D_f, "D_f");
  StepSchedule out;
  out.alpha = std::min(noise_branch(D_tilde, sigma, T), 1.0 / (4.0 * L_hat * (n + 4.0))) /
              std::sqrt(n + 4.0);
  out.mu_cap = D_f / (n + 4.0) * std::sqrt(1.0 / T);
  return out;
}

double optimal_D_tilde_zs_bcd(double L_f, double L_hat, double D_f) {
  require_positive(L_f, "L_f");
  require_positive(L_hat, "L_hat");
  return std::sqrt(3.0 * L_f / (2.0 * L_hat)) * D_f;
}

StepSchedule schedule_zs_bcd_convex(double n, double T, double sigma, double L_f, double D_tilde,
                                    double D_pX) {
  require_positive(n, "n");
  require_positive(T, "T");
  require_nonnegative(sigma, "sigma");
  require_positive(L_f, "L_f");
  require_positive(D_tilde, "D_tilde");
  StepSchedule out;
  out.alpha = std::min(noise_branch(D_tilde, sigma, T), 1.0 / (8.0 * L_f * (n + 5.0))) /
              std::sqrt(n + 5.0);
  out.mu_cap = D_pX / std::sqrt(n + 5.0);
  return out;
}

BudgetSchedule schedule_zs_bmd(double n, double T_budget, double M, double sigma, double L_tilde,
                               double D_tilde, double D_Phi) {
  require_positive(n, "n");
  require_positive(T_budget, "T_budget");
  require_nonnegative(M, "M");
  require_nonnegative(sigma, "sigma");
  require_positive(L_tilde, "L_tilde");
  require_positive(D_tilde, "D_tilde");
  require_nonnegative(D_Phi, "D_Phi");
  const double root = std::sqrt((n + 4.0) * (2.0 * M * M + sigma * sigma) * T_budget);
  BudgetSchedule out;
  out.batch = ceil_count(std::min(std::max(root / (L_tilde * D_tilde), n + 4.0), T_budget));
  out.mu_cap = D_Phi / (n + 4.0) * std::sqrt(1.0 / T_budget);
  out.iterations = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(T_budget / static_cast<double>(out.batch))));
  return out;
}

BudgetSchedule schedule_zs_bccg_approx(double n, double b, double T_budget, double M, double sigma,
                                       double L_hat, double L_check, double D_tilde, double D_Phi) {
  require_positive(n, "n");
  require_positive(b, "b");
  require_positive(T_budget, "T_budget");
  require_nonnegative(M, "M");
  require_nonnegative(sigma, "sigma");
  require_positive(L_hat, "L_hat");
  require_positive(L_check, "L_check");
  require_positive(D_tilde, "D_tilde");
  require_nonnegative(D_Phi, "D_Phi");
  const double omega = L_hat / L_check + 2.0;
  const double root = std::sqrt((n + 4.0) * (2.0 * M * M + sigma * sigma) * T_budget);
  BudgetSchedule out;
  out.batch = ceil_count(std::min(std::max(omega * root / D_tilde, omega * (n + 4.0)), T_budget));
  out.mu_cap = D_Phi / (n + 4.0) * std::sqrt(b / T_budget);
  out.iterations = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(T_budget / static_cast<double>(out.batch))));
  return out;
}

ConditionalGradientSchedule schedule_zs_bccg_composite(double n, double T, double M, double sigma,
                                                       double L_f, double L_check) {
  require_positive(n, "n");
  require_positive(T, "T");
  require_nonnegative(M, "M");
  require_nonnegative(sigma, "sigma");
  require_positive(L_f, "L_f");
  require_positive(L_check, "L_check");
  const double root = std::sqrt(2.0 * M * M + sigma * sigma);
  ConditionalGradientSchedule out;
  out.mu = std::sqrt(2.0 * L_check * root / (5.0 * L_f * L_f * std::pow(n + 4.0, 3)));
  out.alpha = 1.0 / std::sqrt(T);
  out.batch = 2.0 * (n + 4.0) * root * T / L_check;
  return out;
}

TwoPhaseParameters two_phase_parameters(TwoPhaseVariant variant, double epsilon, double Lambda,
                                        double n, double b, double M, double sigma, double L_f,
                                        double L_hat, double L_check, double D_Phi,
                                        double D_tilde) {
  require_positive(epsilon, "epsilon");
  if (!(Lambda > 0.0 && Lambda < 1.0)) throw ConfigError("Lambda must lie in (0, 1)");
  require_positive(n, "n");
  require_positive(b, "b");
  require_nonnegative(M, "M");
  require_nonnegative(sigma, "sigma");
  require_positive(L_f, "L_f");
  require_positive(L_hat, "L_hat");
  require_positive(L_check, "L_check");
  require_nonnegative(D_Phi, "D_Phi");
  require_positive(D_tilde, "D_tilde");

  const double noise = 2.0 * M * M + sigma * sigma;
  const double root = std::sqrt((n + 4.0) * noise);
  TwoPhaseParameters out;
  out.runs = ceil_count(std::log2(2.0 / Lambda));
  const double S = static_cast<double>(out.runs);
  out.post_samples = ceil_count(32.0 * (n + 4.0) * 2.0 * (S + 1.0) / Lambda *
                                std::max(1.0, 16.0 * noise / epsilon));

  const double D2 = D_Phi * D_Phi;
  if (variant == TwoPhaseVariant::bmd) {
    const double L = std::max(L_f, L_hat);
    const double last = 66.0 * 32.0 * b * root / epsilon * (D_tilde + D2 / D_tilde);
    out.budget = ceil_count(std::max({n + 4.0, (n + 4.0) * noise / (L * L * D_tilde * D_tilde),
                                      99.0 * 64.0 * (n + 4.0) * b * L * L * D2 / epsilon,
                                      last * last}));
  } else {
    const double omega = L_hat / L_check + 2.0;
    const double curvature = L_hat * L_hat * D2 + L_hat;
    const double inner = 8.0 * 32.0 * root / epsilon * (2.0 * D_tilde + curvature / D_tilde);
    out.budget = ceil_count(std::max(
        {omega * (n + 4.0), omega * omega * (n + 4.0) * noise / (D_tilde * D_tilde),
         64.0 * omega * b * (n + 4.0) * (17.0 * L_f * L_f * D2 + 8.0 * curvature) / epsilon,
         b * b * omega * omega * inner * inner}));
  }
  return out;
}

}  // namespace zoblock
