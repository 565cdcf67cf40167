#include "zoblock/rng.hpp"

#include <cmath>
#include <numbers>

#include "zoblock/errors.hpp"

namespace zoblock {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed) : key_(splitmix64(seed)) {}

RngStream RngStream::child(std::uint64_t id) const {
  return RngStream(FromKey{}, splitmix64(splitmix64(key_) ^ splitmix64(id ^ 0xA5A5A5A5A5A5A5A5ull)));
}

void RngStream::refill() {
  const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(counter_),
                                         static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(key_),
                                         static_cast<std::uint32_t>(key_ >> 32)};
  buffer_ = philox4x32(ctr, key);
  ++counter_;
  buffered_ = 4;
}

std::uint64_t RngStream::next_u64() {
  if (buffered_ < 2) refill();
  const std::uint64_t lo = buffer_[static_cast<std::size_t>(4 - buffered_)];
  const std::uint64_t hi = buffer_[static_cast<std::size_t>(5 - buffered_)];
  buffered_ -= 2;
  return (hi << 32) | lo;
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * kTwoPow53Inv; }

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  // u1 in (0, 1] keeps the logarithm finite.
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * kTwoPow53Inv;
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

void RngStream::fill_normal(double* out, Index n) {
  for (Index i = 0; i < n; ++i) out[i] = normal();
}

Vector RngStream::normal_vector(Index n) {
  Vector v(n);
  fill_normal(v.data(), n);
  return v;
}

Vector gaussian_direction(RngStream rng, Index n) {
  if (n < 1) throw DimensionError("gaussian_direction needs n >= 1");
  return rng.normal_vector(n);
}

}  // namespace zoblock
