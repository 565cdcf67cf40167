#include "zoblock/prox_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "zoblock/errors.hpp"

namespace zoblock {

namespace {

Vector clamped_log(const Vector& x) {
  return x.array().max(kEntropyClamp).log().matrix();
}

// scale * softmax(z), computed with a max shift.
Vector scaled_softmax(const Vector& z, double scale) {
  const double zmax = z.maxCoeff();
  Vector w = (z.array() - zmax).exp().matrix();
  return w * (scale / w.sum());
}

double entropy_sum(const Vector& y) {
  double acc = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    if (y[i] > 0.0) acc += y[i] * std::log(y[i]);
  }
  return acc;
}

void check_same_size(const Vector& a, Index n, const char* what) {
  if (a.size() != n) {
    std::ostringstream os;
    os << what << " has length " << a.size() << ", block dimension is " << n;
    throw DimensionError(os.str());
  }
}

}  // namespace

// ---------------------------------------------------------------- FeasibleBlock

FeasibleBlock FeasibleBlock::unconstrained(Index n) {
  if (n < 1) throw DimensionError("block dimension must be positive");
  FeasibleBlock b;
  b.kind = Kind::unconstrained;
  b.dim = n;
  return b;
}

FeasibleBlock FeasibleBlock::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || lower.size() < 1) {
    throw DimensionError("box bounds must be nonempty and of equal length");
  }
  if (!(lower.array() < upper.array()).all()) {
    throw ConfigError("box needs lower < upper in every coordinate");
  }
  FeasibleBlock b;
  b.kind = Kind::box;
  b.dim = lower.size();
  b.lower = std::move(lower);
  b.upper = std::move(upper);
  return b;
}

FeasibleBlock FeasibleBlock::box(Index n, double lower, double upper) {
  return box(Vector::Constant(n, lower), Vector::Constant(n, upper));
}

FeasibleBlock FeasibleBlock::ball(Vector center, double radius) {
  if (center.size() < 1) throw DimensionError("ball center must be nonempty");
  if (!(radius > 0.0)) throw ConfigError("ball radius must be positive");
  FeasibleBlock b;
  b.kind = Kind::ball;
  b.dim = center.size();
  b.center = std::move(center);
  b.radius = radius;
  return b;
}

FeasibleBlock FeasibleBlock::simplex(Index n, double scale) {
  if (n < 1) throw DimensionError("block dimension must be positive");
  if (!(scale > 0.0)) throw ConfigError("simplex scale must be positive");
  FeasibleBlock b;
  b.kind = Kind::simplex;
  b.dim = n;
  b.scale = scale;
  return b;
}

double FeasibleBlock::diameter() const {
  switch (kind) {
    case Kind::unconstrained: return std::numeric_limits<double>::infinity();
    case Kind::box: return (upper - lower).norm();
    case Kind::ball: return 2.0 * radius;
    case Kind::simplex: return scale * std::sqrt(2.0);
  }
  return 0.0;
}

bool FeasibleBlock::contains(const Vector& y, double tol) const {
  if (y.size() != dim || !y.allFinite()) return false;
  switch (kind) {
    case Kind::unconstrained: return true;
    case Kind::box:
      return ((y - lower).array() >= -tol).all() && ((upper - y).array() >= -tol).all();
    case Kind::ball: return (y - center).norm() <= radius + tol;
    case Kind::simplex:
      return (y.array() >= -tol).all() &&
             std::abs(y.sum() - scale) <= tol * static_cast<double>(std::max<Index>(dim, 1));
  }
  return false;
}

Vector FeasibleBlock::project(const Vector& y) const {
  check_same_size(y, dim, "projected vector");
  switch (kind) {
    case Kind::unconstrained: return y;
    case Kind::box: return y.cwiseMax(lower).cwiseMin(upper);
    case Kind::ball: {
      const double d = (y - center).norm();
      if (d <= radius) return y;
      return center + (y - center) * (radius / d);
    }
    case Kind::simplex: return project_onto_simplex(y, scale);
  }
  return y;
}

std::string FeasibleBlock::name() const {
  switch (kind) {
    case Kind::unconstrained: return "unconstrained";
    case Kind::box: return "box";
    case Kind::ball: return "ball";
    case Kind::simplex: return "simplex";
  }
  return "unknown";
}

// ------------------------------------------------------------ DistanceGenerator

double DistanceGenerator::value(const Vector& x) const {
  if (kind == Kind::euclidean) return 0.5 * x.squaredNorm();
  return entropy_sum(x);
}

Vector DistanceGenerator::gradient(const Vector& x) const {
  if (kind == Kind::euclidean) return x;
  return (clamped_log(x).array() + 1.0).matrix();
}

std::string DistanceGenerator::name() const {
  return kind == Kind::euclidean ? "euclidean" : "entropy";
}

// ------------------------------------------------------------------ Regularizer

Regularizer Regularizer::l1(double weight) {
  if (!(weight >= 0.0)) throw ConfigError("l1 weight must be nonnegative");
  return {Kind::l1, weight};
}

Regularizer Regularizer::entropy(double weight) {
  if (!(weight >= 0.0)) throw ConfigError("entropy weight must be nonnegative");
  return {Kind::entropy, weight};
}

double Regularizer::value(const Vector& y) const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::l1: return weight * y.lpNorm<1>();
    case Kind::entropy: return weight * entropy_sum(y);
  }
  return 0.0;
}

std::string Regularizer::name() const {
  switch (kind) {
    case Kind::zero: return "zero";
    case Kind::l1: return "l1";
    case Kind::entropy: return "entropy";
  }
  return "unknown";
}

double bregman_div(const DistanceGenerator& phi, const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw DimensionError("bregman_div: length mismatch");
  if (phi.kind == DistanceGenerator::Kind::euclidean) return 0.5 * (x - y).squaredNorm();
  if ((y.array() <= 0.0).any()) throw DomainError("entropy divergence needs y > 0");
  if ((x.array() < 0.0).any()) throw DomainError("entropy divergence needs x >= 0");
  double acc = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) acc += x[i] * std::log(x[i] / y[i]);
    acc += y[i] - x[i];
  }
  return std::max(acc, 0.0);
}

// ---------------------------------------------------------------- BlockGeometry

BlockGeometry::BlockGeometry(FeasibleBlock feasible, DistanceGenerator phi, Regularizer chi)
    : feasible_(std::move(feasible)), phi_(phi), chi_(chi) {
  using FK = FeasibleBlock::Kind;
  const FK k = feasible_.kind;
  bool ok = false;
  if (phi_.kind == DistanceGenerator::Kind::euclidean) {
    if (chi_.kind == Regularizer::Kind::zero) ok = true;
    if (chi_.kind == Regularizer::Kind::l1) ok = k == FK::box || k == FK::unconstrained;
  } else {
    ok = k == FK::simplex && chi_.kind != Regularizer::Kind::l1;
    // The entropy is 1-strongly convex in the Euclidean norm only on simplices of scale <= 1.
    if (ok && feasible_.scale > 1.0) {
      throw ConfigError("entropy distance needs a simplex scale <= 1");
    }
  }
  if (!ok) {
    throw ConfigError("unsupported geometry triple (" + feasible_.name() + ", " + phi_.name() +
                      ", " + chi_.name() + ")");
  }
}

BlockGeometry BlockGeometry::euclidean(FeasibleBlock feasible, Regularizer chi) {
  return BlockGeometry(std::move(feasible), DistanceGenerator::euclidean(), chi);
}

std::string BlockGeometry::name() const {
  return feasible_.name() + "/" + phi_.name() + "/" + chi_.name();
}

Vector BlockGeometry::prox(const Vector& x, const Vector& g, double alpha) const {
  const Index n = dim();
  check_same_size(x, n, "prox point");
  check_same_size(g, n, "prox gradient");
  if (!(alpha > 0.0)) throw ConfigError("prox stepsize must be positive");

  if (phi_.kind == DistanceGenerator::Kind::euclidean) {
    Vector y = x - alpha * g;
    if (chi_.kind == Regularizer::Kind::l1) {
      const double tau = alpha * chi_.weight;
      y = (y.array().sign() * (y.array().abs() - tau).max(0.0)).matrix();
    }
    return feasible_.project(y);
  }

  // Multiplicative update on the simplex in log space.
  Vector z = clamped_log(x) - alpha * g;
  if (chi_.kind == Regularizer::Kind::entropy) z /= (1.0 + alpha * chi_.weight);
  return scaled_softmax(z, feasible_.scale);
}

bool BlockGeometry::has_lmo() const { return feasible_.bounded(); }

Vector BlockGeometry::linear_lmo(const Vector& g) const {
  check_same_size(g, dim(), "lmo gradient");
  switch (feasible_.kind) {
    case FeasibleBlock::Kind::unconstrained:
      throw ConfigError("linear minimization over an unbounded block");
    case FeasibleBlock::Kind::box: {
      Vector y(dim());
      for (Index i = 0; i < dim(); ++i) y[i] = g[i] < 0.0 ? feasible_.upper[i] : feasible_.lower[i];
      return y;
    }
    case FeasibleBlock::Kind::ball: {
      const double gn = g.norm();
      if (gn == 0.0) return feasible_.center;
      return feasible_.center - (feasible_.radius / gn) * g;
    }
    case FeasibleBlock::Kind::simplex: {
      Index j = 0;
      g.minCoeff(&j);
      Vector y = Vector::Zero(dim());
      y[j] = feasible_.scale;
      return y;
    }
  }
  return g;
}

Vector BlockGeometry::lmo(const Vector& g) const {
  check_same_size(g, dim(), "lmo gradient");
  if (!feasible_.bounded()) throw ConfigError("linear minimization over an unbounded block");
  switch (chi_.kind) {
    case Regularizer::Kind::zero: return linear_lmo(g);
    case Regularizer::Kind::l1: {
      // Only boxes carry l1; per coordinate the minimizer is one of lo, 0, hi.
      const double l = chi_.weight;
      Vector y(dim());
      for (Index i = 0; i < dim(); ++i) {
        const double lo = feasible_.lower[i], hi = feasible_.upper[i];
        double best = lo, best_val = g[i] * lo + l * std::abs(lo);
        if (lo < 0.0 && hi > 0.0 && 0.0 < best_val) {
          best = 0.0;
          best_val = 0.0;
        }
        if (g[i] * hi + l * std::abs(hi) < best_val) best = hi;
        y[i] = best;
      }
      return y;
    }
    case Regularizer::Kind::entropy:
      if (chi_.weight == 0.0) return linear_lmo(g);
      return scaled_softmax(-g / chi_.weight, feasible_.scale);
  }
  return g;
}

// -------------------------------------------------------------- ProductGeometry

ProductGeometry::ProductGeometry(BlockLayout layout, std::vector<BlockGeometry> blocks)
    : layout_(std::move(layout)), blocks_(std::move(blocks)) {
  if (static_cast<Index>(blocks_.size()) != layout_.num_blocks()) {
    throw DimensionError("geometry needs one block geometry per layout block");
  }
  for (Index s = 0; s < layout_.num_blocks(); ++s) {
    if (blocks_[static_cast<std::size_t>(s)].dim() != layout_.size(s)) {
      throw DimensionError("block geometry " + std::to_string(s) + " has the wrong dimension");
    }
  }
}

ProductGeometry ProductGeometry::from_factory(
    BlockLayout layout, const std::function<BlockGeometry(Index, Index)>& factory) {
  std::vector<BlockGeometry> blocks;
  blocks.reserve(static_cast<std::size_t>(layout.num_blocks()));
  for (Index s = 0; s < layout.num_blocks(); ++s) blocks.push_back(factory(s, layout.size(s)));
  return ProductGeometry(std::move(layout), std::move(blocks));
}

const BlockGeometry& ProductGeometry::block(Index s) const {
  layout_.check_block(s);
  return blocks_[static_cast<std::size_t>(s)];
}

bool ProductGeometry::bounded() const {
  return std::all_of(blocks_.begin(), blocks_.end(),
                     [](const BlockGeometry& g) { return g.feasible().bounded(); });
}

bool ProductGeometry::contains(const Vector& x, double tol) const {
  if (x.size() != layout_.dimension()) return false;
  for (Index s = 0; s < num_blocks(); ++s) {
    if (!block(s).feasible().contains(block_view(layout_, x, s), tol)) return false;
  }
  return true;
}

double ProductGeometry::chi(const Vector& x) const {
  double acc = 0.0;
  for (Index s = 0; s < num_blocks(); ++s) acc += block(s).chi().value(block_view(layout_, x, s));
  return acc;
}

std::vector<double> ProductGeometry::diameters() const {
  std::vector<double> d;
  for (const auto& g : blocks_) d.push_back(g.feasible().diameter());
  return d;
}

// ------------------------------------------------------------------ operations

Vector block_prox(const BlockGeometry& geom, const Vector& x_s, const Vector& g_s, double alpha) {
  return geom.prox(x_s, g_s, alpha);
}

Vector block_gradient_mapping(const BlockGeometry& geom, const Vector& x_s, const Vector& g_s,
                              double alpha) {
  return (x_s - geom.prox(x_s, g_s, alpha)) / alpha;
}

Vector gradient_mapping(const ProductGeometry& geometry, const Vector& x, const Vector& g,
                        double alpha) {
  const BlockLayout& layout = geometry.layout();
  layout.check_vector(x, "mapping point");
  layout.check_vector(g, "mapping gradient");
  Vector out(layout.dimension());
  for (Index s = 0; s < layout.num_blocks(); ++s) {
    out.segment(layout.offset(s), layout.size(s)) =
        block_gradient_mapping(geometry.block(s), block_view(layout, x, s),
                               block_view(layout, g, s), alpha);
  }
  return out;
}

Vector lmo(const BlockGeometry& geom, const Vector& g_s) { return geom.lmo(g_s); }

CndgResult cndg(const BlockGeometry& geom, const Vector& x_s, const Vector& g_s, double alpha,
                double delta, std::size_t max_inner) {
  if (!(alpha > 0.0)) throw ConfigError("CndG stepsize must be positive");
  if (!(delta > 0.0)) throw ConfigError("CndG tolerance delta must be positive");
  if (!geom.has_lmo()) throw ConfigError("CndG needs a bounded block");
  check_same_size(x_s, geom.dim(), "CndG point");
  check_same_size(g_s, geom.dim(), "CndG gradient");

  const DistanceGenerator& phi = geom.phi();
  const Regularizer& chi = geom.chi();
  const bool euclid = phi.kind == DistanceGenerator::Kind::euclidean;
  const Vector grad_phi_x = euclid ? Vector() : phi.gradient(x_s);

  Vector u = x_s;
  Vector shifted(geom.dim());
  double chi_u = chi.value(u);
  double gap = 0.0;
  for (std::size_t t = 1;; ++t) {
    if (euclid) {
      shifted = g_s + (u - x_s) / alpha;
    } else {
      shifted = g_s + (phi.gradient(u) - grad_phi_x) / alpha;
    }
    const Vector v = geom.lmo(shifted);
    const double chi_v = chi.value(v);
    const double value = shifted.dot(v - u) + chi_v - chi_u;
    gap = -value;
    if (value >= -delta) return {u, t, gap};
    if (t >= max_inner) {
      std::ostringstream os;
      os << "CndG did not reach delta = " << delta << " within " << max_inner
         << " inner iterations (last gap " << gap << ")";
      throw NonTerminationError(os.str(), gap);
    }
    const double step = 2.0 / static_cast<double>(t + 1);
    u = (1.0 - step) * u + step * v;
    chi_u = chi.value(u);
  }
}

Vector project_onto_simplex(const Vector& v, double scale) {
  if (!(scale > 0.0)) throw ConfigError("simplex scale must be positive");
  const Index n = v.size();
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0, theta = 0.0;
  for (Index i = 0; i < n; ++i) {
    cumsum += sorted[static_cast<std::size_t>(i)];
    const double candidate = (cumsum - scale) / static_cast<double>(i + 1);
    if (sorted[static_cast<std::size_t>(i)] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).max(0.0).matrix();
}

}  // namespace zoblock
