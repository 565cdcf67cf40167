#include "zoblock/problems.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "zoblock/errors.hpp"

namespace zoblock {

namespace {

double param(const ParamMap& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const ParamMap& params, const std::string& problem,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, value] : params) {
    (void)value;
    bool found = false;
    for (const char* k : known) found = found || key == k;
    if (!found) throw ConfigError("problem '" + problem + "' has no parameter '" + key + "'");
  }
}

Vector linspace(Index n, double lo, double hi) {
  if (n == 1) return Vector::Constant(1, lo);
  return Vector::LinSpaced(n, lo, hi);
}

std::vector<double> block_max(const BlockLayout& layout, const Vector& a) {
  std::vector<double> out;
  for (Index s = 0; s < layout.num_blocks(); ++s) out.push_back(block_view(layout, a, s).maxCoeff());
  return out;
}

double spectral_norm_sq(const Eigen::MatrixXd& A) {
  if (A.size() == 0) return 0.0;
  const Eigen::MatrixXd gram = A.transpose() * A;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

// Largest |h'(t)| over |t| <= r for h(t) = t^2 / (1 + t^2); h' peaks at 1/sqrt(3).
double sigmoid_slope_bound(double r) {
  const double t = std::min(r, 1.0 / std::sqrt(3.0));
  return 2.0 * t / ((1.0 + t * t) * (1.0 + t * t));
}

// ---------------------------------------------------------------- quadratic

class DiagonalQuadratic : public TestProblem {
 public:
  DiagonalQuadratic(std::string name, ProductGeometry geometry, Vector a, Vector b)
      : TestProblem(std::move(name), std::move(geometry)), a_(std::move(a)), b_(std::move(b)) {
    block_lipschitz_ = block_max(layout(), a_);
    lipschitz_ = a_.maxCoeff();
    convex_ = true;
  }

  double value(const Vector& x) const override {
    return 0.5 * x.dot(a_.cwiseProduct(x)) - b_.dot(x);
  }
  Vector gradient(const Vector& x) const override { return a_.cwiseProduct(x) - b_; }
  std::optional<double> smoothed_value(const Vector& x, double mu) const override {
    return value(x) + 0.5 * mu * mu * a_.sum();
  }

  const Vector& a() const { return a_; }
  const Vector& b() const { return b_; }

  void set_optimum(Vector x_star) {
    optimal_value_ = value(x_star);
    minimizer_ = std::move(x_star);
  }
  void set_gradient_bound(double m) { gradient_bound_ = m; }
  void set_defaults(double sigma, Vector start) {
    default_sigma_ = sigma;
    default_start_ = std::move(start);
  }

 private:
  Vector a_, b_;
};

Vector make_linear_term(const ParamMap& params, Index n, RngStream rng) {
  auto it = params.find("b_value");
  if (it != params.end()) return Vector::Constant(n, it->second);
  return rng.normal_vector(n) * param(params, "b_scale", 1.0);
}

ProblemPtr make_quadratic(Index n, Index b, const ParamMap& params) {
  reject_unknown(params, "quadratic",
                 {"a_min", "a_max", "b_scale", "b_value", "box", "start", "sigma", "seed"});
  const double a_min = param(params, "a_min", 1.0);
  const double a_max = param(params, "a_max", a_min);
  if (!(a_min > 0.0) || a_max < a_min) throw ConfigError("quadratic needs 0 < a_min <= a_max");
  const double box = param(params, "box", 0.0);
  if (box < 0.0) throw ConfigError("quadratic box half-width must be nonnegative");
  RngStream rng(static_cast<std::uint64_t>(param(params, "seed", 1.0)));

  BlockLayout layout = BlockLayout::uniform(n, b);
  Vector a = linspace(n, a_min, a_max);
  Vector lin = make_linear_term(params, n, rng.child(0));
  auto geometry = ProductGeometry::from_factory(layout, [&](Index, Index n_s) {
    return box > 0.0 ? BlockGeometry::euclidean(FeasibleBlock::box(n_s, -box, box))
                     : BlockGeometry::euclidean(FeasibleBlock::unconstrained(n_s));
  });

  auto p = std::make_shared<DiagonalQuadratic>("quadratic", std::move(geometry), a, lin);
  Vector x_star = lin.cwiseQuotient(a);
  Vector start = Vector::Constant(n, param(params, "start", 0.0));
  if (box > 0.0) {
    x_star = x_star.cwiseMax(-box).cwiseMin(box);
    start = start.cwiseMax(-box).cwiseMin(box);
    p->set_gradient_bound(((a * box).array() + lin.array().abs()).matrix().norm());
  }
  p->set_optimum(x_star);
  p->set_defaults(param(params, "sigma", 0.1), start);
  return p;
}

// --------------------------------------------------------- simplex quadratic

// Minimizer of 0.5 sum a x^2 - b x over {x >= 0, sum x = c}: x_i = max(0, (b_i - theta) / a_i).
Vector water_fill(const Vector& a, const Vector& b, double c) {
  auto mass = [&](double theta) {
    return ((b.array() - theta) / a.array()).max(0.0).sum();
  };
  double lo = (b.array() - c * a.array()).minCoeff() - 1.0;
  double hi = b.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mass(mid) > c) lo = mid; else hi = mid;
  }
  const double theta = 0.5 * (lo + hi);
  Vector x = ((b.array() - theta) / a.array()).max(0.0).matrix();
  return x * (c / x.sum());
}

ProblemPtr make_simplex_entropy(Index n, Index b, const ParamMap& params) {
  reject_unknown(params, "simplex_entropy",
                 {"a_min", "a_max", "b_scale", "b_value", "scale", "sigma", "seed"});
  const double a_min = param(params, "a_min", 1.0);
  const double a_max = param(params, "a_max", 2.0);
  if (!(a_min > 0.0) || a_max < a_min) throw ConfigError("simplex_entropy needs 0 < a_min <= a_max");
  const double scale = param(params, "scale", 1.0);
  RngStream rng(static_cast<std::uint64_t>(param(params, "seed", 1.0)));

  BlockLayout layout = BlockLayout::uniform(n, b);
  Vector a = linspace(n, a_min, a_max);
  Vector lin = make_linear_term(params, n, rng.child(0));
  auto geometry = ProductGeometry::from_factory(layout, [&](Index, Index n_s) {
    return BlockGeometry(FeasibleBlock::simplex(n_s, scale), DistanceGenerator::entropy(),
                         Regularizer::zero());
  });
  auto p = std::make_shared<DiagonalQuadratic>("simplex_entropy", std::move(geometry), a, lin);

  Vector x_star(n), start(n);
  double m_sq = 0.0;
  for (Index s = 0; s < layout.num_blocks(); ++s) {
    const Index off = layout.offset(s), n_s = layout.size(s);
    const Vector a_s = a.segment(off, n_s), b_s = lin.segment(off, n_s);
    x_star.segment(off, n_s) = water_fill(a_s, b_s, scale);
    start.segment(off, n_s).setConstant(scale / static_cast<double>(n_s));
    // ||a x - b||^2 is convex, so its maximum over the simplex sits at a vertex.
    double best = 0.0;
    for (Index j = 0; j < n_s; ++j) {
      best = std::max(best, std::pow(a_s[j] * scale - b_s[j], 2) - b_s[j] * b_s[j]);
    }
    m_sq += best + b_s.squaredNorm();
  }
  p->set_optimum(x_star);
  p->set_gradient_bound(std::sqrt(m_sq));
  p->set_defaults(param(params, "sigma", 0.1), start);
  return p;
}

// ----------------------------------------------------- sigmoid least squares

class SigmoidLeastSquares : public TestProblem {
 public:
  SigmoidLeastSquares(std::string name, ProductGeometry geometry, Eigen::MatrixXd A, Vector y,
                      double lambda)
      : TestProblem(std::move(name), std::move(geometry)), A_(std::move(A)), y_(std::move(y)),
        lambda_(lambda) {
    const BlockLayout& lay = layout();
    for (Index s = 0; s < lay.num_blocks(); ++s) {
      block_lipschitz_.push_back(spectral_norm_sq(A_.middleCols(lay.offset(s), lay.size(s))) +
                                 2.0 * lambda_);
    }
    lipschitz_ = spectral_norm_sq(A_) + 2.0 * lambda_;
  }

  double value(const Vector& x) const override {
    const double penalty = (x.array().square() / (1.0 + x.array().square())).sum();
    return 0.5 * (A_ * x - y_).squaredNorm() + lambda_ * penalty;
  }

  Vector gradient(const Vector& x) const override {
    const Eigen::ArrayXd d = 1.0 + x.array().square();
    return A_.transpose() * (A_ * x - y_) + lambda_ * (2.0 * x.array() / (d * d)).matrix();
  }

  void finish(const ParamMap& params, Index n) {
    const ProductGeometry& geo = geometry();
    // Both terms and chi are nonnegative.
    optimal_lower_bound_ = 0.0;
    if (A_.squaredNorm() == 0.0 || y_.squaredNorm() == 0.0) {
      optimal_value_ = value(Vector::Zero(n));
      minimizer_ = Vector::Zero(n);
    }
    Vector start = Vector::Constant(n, param(params, "start", 0.5));
    if (geo.bounded()) {
      double r_sq = 0.0, slope = 0.0;
      for (Index s = 0; s < geo.num_blocks(); ++s) {
        const FeasibleBlock& fb = geo.block(s).feasible();
        const Index off = geo.layout().offset(s);
        for (Index i = 0; i < fb.dim; ++i) {
          const double r = std::max(std::abs(fb.lower[i]), std::abs(fb.upper[i]));
          r_sq += r * r;
          slope += std::pow(sigmoid_slope_bound(r), 2);
          start[off + i] = std::clamp(start[off + i], fb.lower[i], fb.upper[i]);
        }
      }
      // ||A^T (A x - y)|| <= ||A||^2 ||x|| + ||A^T y|| plus the penalty slope term.
      gradient_bound_ = spectral_norm_sq(A_) * std::sqrt(r_sq) + (A_.transpose() * y_).norm() +
                        lambda_ * std::sqrt(slope);
    }
    default_sigma_ = param(params, "sigma", 0.1);
    default_start_ = start;
  }

 private:
  Eigen::MatrixXd A_;
  Vector y_;
  double lambda_;
};

ProblemPtr make_sigmoid(const std::string& name, Index n, Index b, const ParamMap& params,
                        bool composite) {
  if (composite) {
    reject_unknown(params, name, {"rows", "lambda", "a_scale", "y_noise", "box", "l1", "start",
                                  "sigma", "seed"});
  } else {
    reject_unknown(params, name,
                   {"rows", "lambda", "a_scale", "y_noise", "box", "start", "sigma", "seed"});
  }
  const Index rows = static_cast<Index>(param(params, "rows", static_cast<double>(n)));
  if (rows < 1) throw ConfigError(name + " needs rows >= 1");
  const double lambda = param(params, "lambda", 0.1);
  if (lambda < 0.0) throw ConfigError(name + " needs lambda >= 0");
  const double a_scale = param(params, "a_scale", 1.0);
  const double box = param(params, "box", composite ? 1.0 : 0.0);
  if (box < 0.0 || (composite && box == 0.0)) throw ConfigError(name + " needs a positive box");
  const double l1 = composite ? param(params, "l1", 0.05) : 0.0;
  RngStream rng(static_cast<std::uint64_t>(param(params, "seed", 1.0)));

  RngStream mat_rng = rng.child(0);
  Eigen::MatrixXd A(rows, n);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < n; ++j) A(i, j) = mat_rng.normal();
    A.row(i).normalize();
  }
  A *= a_scale;
  const Vector x_ref = rng.child(1).normal_vector(n);
  const Vector y = A * x_ref + a_scale * param(params, "y_noise", 0.1) * rng.child(2).normal_vector(rows);

  BlockLayout layout = BlockLayout::uniform(n, b);
  auto geometry = ProductGeometry::from_factory(layout, [&](Index, Index n_s) {
    if (box > 0.0) {
      return BlockGeometry::euclidean(FeasibleBlock::box(n_s, -box, box),
                                      composite ? Regularizer::l1(l1) : Regularizer::zero());
    }
    return BlockGeometry::euclidean(FeasibleBlock::unconstrained(n_s));
  });
  auto p = std::make_shared<SigmoidLeastSquares>(name, std::move(geometry), std::move(A), y, lambda);
  p->finish(params, n);
  return p;
}

}  // namespace

double TestProblem::lipschitz_max() const {
  return *std::max_element(block_lipschitz_.begin(), block_lipschitz_.end());
}

double TestProblem::lipschitz_min() const {
  return *std::min_element(block_lipschitz_.begin(), block_lipschitz_.end());
}

std::optional<double> TestProblem::optimal_value_lower_bound() const {
  if (optimal_value_) return optimal_value_;
  return optimal_lower_bound_;
}

Objective TestProblem::objective() const {
  return [this](const Vector& x) { return value(x); };
}

SmoothedOracle TestProblem::make_oracle(double mu, std::optional<double> sigma) const {
  const double s = sigma.value_or(default_sigma_);
  NoiseModel noise = s > 0.0 ? NoiseModel::gradient_consistent(s) : NoiseModel::noiseless();
  return SmoothedOracle(objective(), noise, mu, layout());
}

const std::vector<std::string>& problem_catalog() {
  static const std::vector<std::string> names{"quadratic", "nonconvex_sigmoid_ls",
                                              "composite_lasso_box", "simplex_entropy"};
  return names;
}

ProblemPtr make_problem(const std::string& name, Index n, Index b, const ParamMap& params) {
  if (n < 1 || b < 1 || b > n) {
    throw ConfigError("problem needs 1 <= b <= n, got n=" + std::to_string(n) +
                      " b=" + std::to_string(b));
  }
  if (name == "quadratic") return make_quadratic(n, b, params);
  if (name == "nonconvex_sigmoid_ls") return make_sigmoid(name, n, b, params, false);
  if (name == "composite_lasso_box") return make_sigmoid(name, n, b, params, true);
  if (name == "simplex_entropy") return make_simplex_entropy(n, b, params);
  throw ConfigError("unknown problem '" + name + "'");
}

Vector random_feasible_point(const ProductGeometry& geometry, RngStream& rng) {
  const BlockLayout& layout = geometry.layout();
  Vector x(layout.dimension());
  for (Index s = 0; s < layout.num_blocks(); ++s) {
    const FeasibleBlock& fb = geometry.block(s).feasible();
    auto seg = x.segment(layout.offset(s), layout.size(s));
    switch (fb.kind) {
      case FeasibleBlock::Kind::unconstrained:
        for (Index i = 0; i < fb.dim; ++i) seg[i] = -2.0 + 4.0 * rng.uniform();
        break;
      case FeasibleBlock::Kind::box:
        for (Index i = 0; i < fb.dim; ++i) {
          seg[i] = fb.lower[i] + (fb.upper[i] - fb.lower[i]) * rng.uniform();
        }
        break;
      case FeasibleBlock::Kind::ball: {
        Vector d = rng.normal_vector(fb.dim);
        const double r = fb.radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(fb.dim));
        seg = fb.center + d.normalized() * r;
        break;
      }
      case FeasibleBlock::Kind::simplex: {
        Vector e(fb.dim);
        for (Index i = 0; i < fb.dim; ++i) e[i] = -std::log(1.0 - rng.uniform());
        seg = e * (fb.scale / e.sum());
        break;
      }
    }
  }
  return x;
}

AuditReport audit_constants(const TestProblem& problem, RngStream rng, std::size_t samples) {
  AuditReport report;
  report.samples = samples;
  const ProductGeometry& geo = problem.geometry();
  const BlockLayout& layout = problem.layout();
  const auto& L = problem.block_lipschitz();
  for (std::size_t i = 0; i < samples; ++i) {
    const Vector x = random_feasible_point(geo, rng);
    const Vector gx = problem.gradient(x);

    const Index s = static_cast<Index>(rng.uniform() * static_cast<double>(layout.num_blocks()));
    const Vector e = rng.normal_vector(layout.size(s)) * rng.uniform();
    Vector xe = x;
    block_view(layout, xe, s) += e;
    const double num = (block_view(layout, problem.gradient(xe), s) - block_view(layout, gx, s)).norm();
    if (e.norm() > 0.0) {
      report.worst_block_ratio = std::max(
          report.worst_block_ratio, num / (L[static_cast<std::size_t>(s)] * e.norm()));
    }

    const Vector y = random_feasible_point(geo, rng);
    const double dist = (x - y).norm();
    if (dist > 0.0) {
      report.worst_global_ratio = std::max(
          report.worst_global_ratio, (problem.gradient(y) - gx).norm() / (problem.lipschitz() * dist));
    }
    if (auto m = problem.gradient_bound()) {
      report.worst_gradient_ratio = std::max(report.worst_gradient_ratio, gx.norm() / *m);
    }
  }
  return report;
}

}  // namespace zoblock
