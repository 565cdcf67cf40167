#pragma once

#include <cstddef>

namespace zoblock {

struct StepSchedule {
  double alpha = 0.0;
  double mu_cap = 0.0;
};

// Nonconvex ZS-BCD with uniform blocks:
// alpha = min{D~ / (sigma sqrt T), 1 / (4 L^ (n+4))} / sqrt(n+4), mu <= D_f / ((n+4) sqrt T).
StepSchedule schedule_zs_bcd_corollary(double n, double T, double sigma, double L_hat,
                                       double D_tilde, double D_f);
// D~* = sqrt(3 L_f / (2 L^)) D_f.
double optimal_D_tilde_zs_bcd(double L_f, double L_hat, double D_f);

// Convex ZS-BCD: alpha = min{D~ / (sigma sqrt T), 1 / (8 L_f (n+5))} / sqrt(n+5), mu <= D_pX / sqrt(n+5).
StepSchedule schedule_zs_bcd_convex(double n, double T, double sigma, double L_f, double D_tilde,
                                    double D_pX);

struct BudgetSchedule {
  std::size_t batch = 1;       // T'
  double mu_cap = 0.0;
  std::size_t iterations = 1;  // T = floor(T~ / T')
};

// ZS-BMD under a total budget T~, with L~ = max(L_f, L^).
BudgetSchedule schedule_zs_bmd(double n, double T_budget, double M, double sigma, double L_tilde,
                               double D_tilde, double D_Phi);

// Approximate ZS-BCCG under a total budget T~, with omega = L^/L_check + 2.
BudgetSchedule schedule_zs_bccg_approx(double n, double b, double T_budget, double M, double sigma,
                                       double L_hat, double L_check, double D_tilde, double D_Phi);

struct ConditionalGradientSchedule {
  double mu = 0.0;
  double alpha = 0.0;
  double batch = 0.0;  // real-valued as displayed; callers round up
};

// ZS-BCCG' with uniform blocks: mu = [2 L_check sqrt(2M^2+sigma^2) / (5 L_f^2 (n+4)^3)]^(1/2),
// alpha = 1/sqrt(T), T_k = 2 (n+4) sqrt(2M^2+sigma^2) T / L_check.
ConditionalGradientSchedule schedule_zs_bccg_composite(double n, double T, double M, double sigma,
                                                       double L_f, double L_check);

enum class TwoPhaseVariant { bmd, bccg };

struct TwoPhaseParameters {
  std::size_t runs = 1;          // S
  std::size_t budget = 1;        // T~
  std::size_t post_samples = 1;  // post-optimization sample size
};

TwoPhaseParameters two_phase_parameters(TwoPhaseVariant variant, double epsilon, double Lambda,
                                        double n, double b, double M, double sigma, double L_f,
                                        double L_hat, double L_check, double D_Phi,
                                        double D_tilde);

}  // namespace zoblock
