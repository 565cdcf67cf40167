#include "zoblock/zeroth_oracle.hpp"

#include <cmath>
#include <sstream>

#include "zoblock/errors.hpp"

namespace zoblock {

namespace {

constexpr std::uint64_t kDirectionStream = 0;
constexpr std::uint64_t kNoiseStream = 1;

std::string describe_iterate(const Vector& x) {
  std::ostringstream os;
  os << "x = (";
  const Index shown = std::min<Index>(x.size(), 6);
  for (Index i = 0; i < shown; ++i) os << (i ? ", " : "") << x[i];
  if (shown < x.size()) os << ", ... [n=" << x.size() << "]";
  os << ")";
  return os.str();
}

}  // namespace

NoiseModel NoiseModel::additive_gaussian_value(double sigma_v) {
  if (!(sigma_v >= 0.0)) throw ConfigError("additive noise level must be nonnegative");
  return {Kind::additive_gaussian_value, sigma_v};
}

NoiseModel NoiseModel::gradient_consistent(double sigma) {
  if (!(sigma >= 0.0)) throw ConfigError("gradient noise level sigma must be nonnegative");
  return {Kind::gradient_consistent, sigma};
}

std::string NoiseModel::name() const {
  switch (kind) {
    case Kind::noiseless: return "noiseless";
    case Kind::additive_gaussian_value: return "additive_gaussian_value";
    case Kind::gradient_consistent: return "gradient_consistent";
  }
  return "unknown";
}

SmoothedOracle::SmoothedOracle(Objective f, NoiseModel noise, double mu, BlockLayout layout)
    : f_(std::move(f)), noise_(noise), mu_(mu), layout_(std::move(layout)) {
  if (!f_) throw ConfigError("oracle needs an objective");
  if (!(mu_ >= kMuFloor) || !std::isfinite(mu_)) {
    std::ostringstream os;
    os << "smoothing parameter mu = " << mu_ << " is below the floor " << kMuFloor;
    throw ConfigError(os.str());
  }
}

SmoothedOracle::SmoothedOracle(const SmoothedOracle& other)
    : f_(other.f_), noise_(other.noise_), mu_(other.mu_), layout_(other.layout_),
      calls_(other.calls()) {}

SmoothedOracle& SmoothedOracle::operator=(const SmoothedOracle& other) {
  if (this != &other) {
    f_ = other.f_;
    noise_ = other.noise_;
    mu_ = other.mu_;
    layout_ = other.layout_;
    calls_.store(other.calls(), std::memory_order_relaxed);
  }
  return *this;
}

NoiseDraw SmoothedOracle::draw_noise(RngStream rng) const {
  NoiseDraw xi;
  switch (noise_.kind) {
    case NoiseModel::Kind::noiseless: break;
    case NoiseModel::Kind::additive_gaussian_value:
      if (noise_.sigma > 0.0) xi.shift = noise_.sigma * rng.normal();
      break;
    case NoiseModel::Kind::gradient_consistent:
      if (noise_.sigma > 0.0) {
        const Index n = dimension();
        xi.linear = rng.normal_vector(n) * (noise_.sigma / std::sqrt(static_cast<double>(n)));
      }
      break;
  }
  return xi;
}

double SmoothedOracle::checked(double value, const Vector& x) const {
  if (!std::isfinite(value)) {
    throw NumericalError("objective returned a non-finite value at " + describe_iterate(x));
  }
  return value;
}

double SmoothedOracle::evaluate(const Vector& x, const NoiseDraw& xi) const {
  layout_.check_vector(x, "oracle point");
  double value = f_(x) + xi.shift;
  if (xi.linear.size() > 0) value += xi.linear.dot(x);
  calls_.fetch_add(1, std::memory_order_relaxed);
  return checked(value, x);
}

double SmoothedOracle::evaluate(const Vector& x, RngStream noise_rng) const {
  return evaluate(x, draw_noise(noise_rng));
}

Vector SmoothedOracle::gsmooth_estimate(const Vector& x, const Vector& u,
                                        const NoiseDraw& xi) const {
  layout_.check_vector(u, "direction");
  const Vector shifted = x + mu_ * u;
  const double f_plus = evaluate(shifted, xi);
  const double f_base = evaluate(x, xi);
  return ((f_plus - f_base) / mu_) * u;
}

Vector SmoothedOracle::gsmooth_estimate(const Vector& x, const RngStream& sample) const {
  layout_.check_vector(x, "oracle point");
  Vector acc = Vector::Zero(dimension());
  accumulate(x, 0, dimension(), 1, RngStream(sample), acc);
  return acc;
}

void SmoothedOracle::accumulate(const Vector& x, Index lo, Index len, std::size_t count,
                                const RngStream& step, Vector& acc) const {
  const Index n = dimension();
  Vector u(n);
  Vector shifted(n);
  // f(x) is deterministic, so it is evaluated once per batch; every sample still
  // accounts for its two oracle calls.
  const double fx = checked(f_(x), x);
  const bool single = count == 1;
  for (std::size_t t = 0; t < count; ++t) {
    const RngStream sample = single ? step : step.child(t);
    RngStream dir = sample.child(kDirectionStream);
    dir.fill_normal(u.data(), n);
    const NoiseDraw xi = noise_.kind == NoiseModel::Kind::noiseless
                             ? NoiseDraw{}
                             : draw_noise(sample.child(kNoiseStream));
    shifted.noalias() = x + mu_ * u;
    double f_plus = checked(f_(shifted), shifted) + xi.shift;
    double f_base = fx + xi.shift;
    if (xi.linear.size() > 0) {
      f_plus += xi.linear.dot(shifted);
      f_base += xi.linear.dot(x);
    }
    if (!std::isfinite(f_plus)) checked(f_plus, shifted);
    const double coef = (f_plus - f_base) / mu_;
    acc.segment(0, len).noalias() += coef * u.segment(lo, len);
  }
  calls_.fetch_add(2 * count, std::memory_order_relaxed);
}

Vector SmoothedOracle::batch_block_estimate(const Vector& x, Index s, std::size_t batch,
                                            const RngStream& step) const {
  if (batch == 0) throw ConfigError("batch size T_k must be at least 1");
  layout_.check_vector(x, "oracle point");
  const Index len = layout_.size(s);
  Vector acc = Vector::Zero(len);
  accumulate(x, layout_.offset(s), len, batch, step, acc);
  if (batch > 1) acc /= static_cast<double>(batch);
  return acc;
}

Vector SmoothedOracle::batch_full_estimate(const Vector& x, std::size_t count,
                                           const RngStream& stream) const {
  if (count == 0) throw ConfigError("sample size must be at least 1");
  layout_.check_vector(x, "oracle point");
  Vector acc = Vector::Zero(dimension());
  accumulate(x, 0, dimension(), count, stream, acc);
  if (count > 1) acc /= static_cast<double>(count);
  return acc;
}

McEstimate SmoothedOracle::smoothed_value_mc(const Vector& x, std::size_t samples,
                                             RngStream rng) const {
  if (samples == 0) throw ConfigError("sample size must be at least 1");
  const Index n = dimension();
  Vector u(n);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    rng.fill_normal(u.data(), n);
    const double v = f_(x + mu_ * u);
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double var = samples > 1 ? m2 / static_cast<double>(samples - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(samples))};
}

McVectorEstimate SmoothedOracle::smoothed_grad_mc(const Vector& x, std::size_t samples,
                                                  RngStream rng) const {
  if (samples == 0) throw ConfigError("sample size must be at least 1");
  const Index n = dimension();
  const double fx = f_(x);
  Vector u(n);
  Vector mean = Vector::Zero(n), m2 = Vector::Zero(n);
  for (std::size_t i = 0; i < samples; ++i) {
    rng.fill_normal(u.data(), n);
    const Vector g = ((f_(x + mu_ * u) - fx) / mu_) * u;
    const Vector delta = g - mean;
    mean += delta / static_cast<double>(i + 1);
    m2.array() += delta.array() * (g - mean).array();
  }
  Vector se = Vector::Zero(n);
  if (samples > 1) se = (m2 / static_cast<double>(samples - 1) / static_cast<double>(samples)).cwiseSqrt();
  return {mean, se};
}

}  // namespace zoblock
