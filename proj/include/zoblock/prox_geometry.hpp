#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "zoblock/block_space.hpp"

namespace zoblock {

inline constexpr double kEntropyClamp = 1e-12;

struct FeasibleBlock {
  enum class Kind { unconstrained, box, ball, simplex };

  Kind kind = Kind::unconstrained;
  Index dim = 0;
  Vector lower, upper;  // box
  Vector center;        // ball
  double radius = 0.0;  // ball
  double scale = 0.0;   // simplex: {y >= 0, sum y = scale}

  static FeasibleBlock unconstrained(Index n);
  static FeasibleBlock box(Vector lower, Vector upper);
  static FeasibleBlock box(Index n, double lower, double upper);
  static FeasibleBlock ball(Vector center, double radius);
  static FeasibleBlock simplex(Index n, double scale = 1.0);

  bool bounded() const { return kind != Kind::unconstrained; }
  double diameter() const;
  bool contains(const Vector& y, double tol = 1e-10) const;
  // Euclidean projection.
  Vector project(const Vector& y) const;
  std::string name() const;
};

struct DistanceGenerator {
  enum class Kind { euclidean, entropy };
  Kind kind = Kind::euclidean;

  static DistanceGenerator euclidean() { return {Kind::euclidean}; }
  static DistanceGenerator entropy() { return {Kind::entropy}; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  std::string name() const;
};

struct Regularizer {
  enum class Kind { zero, l1, entropy };
  Kind kind = Kind::zero;
  double weight = 0.0;

  static Regularizer zero() { return {}; }
  static Regularizer l1(double weight);
  static Regularizer entropy(double weight);

  double value(const Vector& y) const;
  std::string name() const;
};

// D_phi(x, y) = phi(x) - phi(y) - <grad phi(y), x - y>.
double bregman_div(const DistanceGenerator& phi, const Vector& x, const Vector& y);

// Per-block triple (X_s, phi_s, chi_s). Only triples with a closed-form prox are accepted.
class BlockGeometry {
 public:
  BlockGeometry(FeasibleBlock feasible, DistanceGenerator phi, Regularizer chi);

  static BlockGeometry euclidean(FeasibleBlock feasible, Regularizer chi = Regularizer::zero());

  const FeasibleBlock& feasible() const { return feasible_; }
  const DistanceGenerator& phi() const { return phi_; }
  const Regularizer& chi() const { return chi_; }
  Index dim() const { return feasible_.dim; }

  // argmin_y <g, y> + D_phi(y, x) / alpha + chi(y) over X_s.
  Vector prox(const Vector& x, const Vector& g, double alpha) const;
  // argmin_y <g, y> + chi(y) over X_s.
  Vector lmo(const Vector& g) const;
  // argmin_y <g, y> over X_s, ignoring chi.
  Vector linear_lmo(const Vector& g) const;
  bool has_lmo() const;
  std::string name() const;

 private:
  FeasibleBlock feasible_;
  DistanceGenerator phi_;
  Regularizer chi_;
};

// Geometry of X = X_1 x ... x X_b with chi(x) = sum_s chi_s(x_s).
class ProductGeometry {
 public:
  ProductGeometry(BlockLayout layout, std::vector<BlockGeometry> blocks);
  // Builds block s from factory(s, n_s).
  static ProductGeometry from_factory(BlockLayout layout,
                                     const std::function<BlockGeometry(Index, Index)>& factory);

  const BlockLayout& layout() const { return layout_; }
  const BlockGeometry& block(Index s) const;
  Index num_blocks() const { return layout_.num_blocks(); }

  bool bounded() const;
  bool contains(const Vector& x, double tol = 1e-10) const;
  double chi(const Vector& x) const;
  // Per-block diameters D_{X_s}.
  std::vector<double> diameters() const;

 private:
  BlockLayout layout_;
  std::vector<BlockGeometry> blocks_;
};

Vector block_prox(const BlockGeometry& geom, const Vector& x_s, const Vector& g_s, double alpha);

// (x_s - P_s(x_s, g_s, alpha)) / alpha.
Vector block_gradient_mapping(const BlockGeometry& geom, const Vector& x_s, const Vector& g_s,
                              double alpha);

// Full mapping stacking every block.
Vector gradient_mapping(const ProductGeometry& geometry, const Vector& x, const Vector& g,
                        double alpha);

Vector lmo(const BlockGeometry& geom, const Vector& g_s);

struct CndgResult {
  Vector point;
  std::size_t inner_iterations = 0;
  double last_gap = 0.0;
};

// Conditional-gradient approximation of the prox: stops at the first u_t whose
// Frank-Wolfe gap of V(u) = <g + (grad phi(u_t) - grad phi(x)) / alpha, u - u_t>
// + chi(u) - chi(u_t) is at most delta.
CndgResult cndg(const BlockGeometry& geom, const Vector& x_s, const Vector& g_s, double alpha,
                double delta, std::size_t max_inner = 1000000);

// Sort-based Euclidean projection onto {y >= 0, sum y = scale}.
Vector project_onto_simplex(const Vector& v, double scale = 1.0);

}  // namespace zoblock
