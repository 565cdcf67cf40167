#pragma once

#include <array>
#include <cstdint>

#include "zoblock/block_space.hpp"

namespace zoblock {

// Philox4x32-10 counter-based generator.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

// A deterministic random stream identified by a 64-bit key. Streams form a tree:
// child(id) derives an independent stream, so (seed, run, iteration, sample)
// paths give the same numbers regardless of evaluation order or thread.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0);

  RngStream child(std::uint64_t id) const;
  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64();
  // Uniform on [0, 1).
  double uniform();
  double normal();
  void fill_normal(double* out, Index n);
  Vector normal_vector(Index n);

 private:
  struct FromKey {};
  RngStream(FromKey, std::uint64_t key) : key_(key) {}
  void refill();

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// Draw u with i.i.d. standard normal coordinates from the start of `rng`.
Vector gaussian_direction(RngStream rng, Index n);

}  // namespace zoblock
