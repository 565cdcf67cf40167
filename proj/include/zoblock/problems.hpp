#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zoblock/block_space.hpp"
#include "zoblock/prox_geometry.hpp"
#include "zoblock/rng.hpp"
#include "zoblock/zeroth_oracle.hpp"

namespace zoblock {

using ParamMap = std::map<std::string, double>;

// A benchmark objective with analytic gradient and declared constants. The
// gradient is for diagnostics only; solvers see values through SmoothedOracle.
class TestProblem {
 public:
  virtual ~TestProblem() = default;

  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  // Closed-form f_mu when available.
  virtual std::optional<double> smoothed_value(const Vector& /*x*/, double /*mu*/) const {
    return std::nullopt;
  }

  const std::string& name() const { return name_; }
  const BlockLayout& layout() const { return geometry_.layout(); }
  const ProductGeometry& geometry() const { return geometry_; }
  Index dimension() const { return layout().dimension(); }
  Index num_blocks() const { return layout().num_blocks(); }

  const std::vector<double>& block_lipschitz() const { return block_lipschitz_; }
  double lipschitz() const { return lipschitz_; }
  double lipschitz_max() const;
  double lipschitz_min() const;
  // Gradient norm bound over X; absent for unbounded feasible sets.
  std::optional<double> gradient_bound() const { return gradient_bound_; }
  // Phi* = min f + chi over X, when known exactly.
  std::optional<double> optimal_value() const { return optimal_value_; }
  // A certified lower bound on Phi*; equals optimal_value() when that is known.
  std::optional<double> optimal_value_lower_bound() const;
  std::optional<Vector> minimizer() const { return minimizer_; }
  bool convex() const { return convex_; }
  double default_sigma() const { return default_sigma_; }
  const Vector& default_start() const { return default_start_; }

  // Phi(x) = f(x) + chi(x).
  double composite_value(const Vector& x) const { return value(x) + geometry_.chi(x); }
  Objective objective() const;
  SmoothedOracle make_oracle(double mu, std::optional<double> sigma = std::nullopt) const;

 protected:
  TestProblem(std::string name, ProductGeometry geometry)
      : name_(std::move(name)), geometry_(std::move(geometry)) {}

  std::string name_;
  ProductGeometry geometry_;
  std::vector<double> block_lipschitz_;
  double lipschitz_ = 0.0;
  std::optional<double> gradient_bound_;
  std::optional<double> optimal_value_;
  std::optional<double> optimal_lower_bound_;
  std::optional<Vector> minimizer_;
  bool convex_ = false;
  double default_sigma_ = 0.0;
  Vector default_start_;
};

using ProblemPtr = std::shared_ptr<const TestProblem>;

const std::vector<std::string>& problem_catalog();

// Parameters by problem (defaults in parentheses):
//   quadratic: a_min (1), a_max (a_min), b_scale (1), b_value (unset: b ~ b_scale N(0,1)),
//              box (0 = unconstrained, else [-box, box]), start (0), sigma (0.1), seed (1)
//   nonconvex_sigmoid_ls: rows (n), lambda (0.1), a_scale (1), y_noise (0.1), box (0),
//              start (0.5), sigma (0.1), seed (1)
//   composite_lasso_box: as nonconvex_sigmoid_ls with box (1) and l1 (0.05)
//   simplex_entropy: a_min (1), a_max (2), b_scale (1), scale (1), sigma (0.1), seed (1)
ProblemPtr make_problem(const std::string& name, Index n, Index b, const ParamMap& params = {});

struct AuditReport {
  std::size_t samples = 0;
  double worst_block_ratio = 0.0;   // max ||grad_s f(x + U_s e) - grad_s f(x)|| / (L_s ||e||)
  double worst_global_ratio = 0.0;  // same with L_f on full perturbations
  double worst_gradient_ratio = 0.0;  // max ||grad f(x)|| / M over feasible samples
  bool passed() const {
    return worst_block_ratio <= 1.0 + 1e-9 && worst_global_ratio <= 1.0 + 1e-9 &&
           worst_gradient_ratio <= 1.0 + 1e-9;
  }
};

// Random-pair audit of the declared L_s, L_f and M.
AuditReport audit_constants(const TestProblem& problem, RngStream rng, std::size_t samples = 1000);

// Uniform random point of the feasible set (unbounded blocks draw from [-2, 2]).
Vector random_feasible_point(const ProductGeometry& geometry, RngStream& rng);

}  // namespace zoblock
