#include "doctest.h"
#include "zoblock/block_space.hpp"
#include "zoblock/errors.hpp"
#include "zoblock/rng.hpp"

using namespace zoblock;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}
}  // namespace

TEST_CASE("layout offsets and sizes") {
  BlockLayout l({2, 3, 1});
  CHECK(l.dimension() == 6);
  CHECK(l.num_blocks() == 3);
  CHECK(l.offset(0) == 0);
  CHECK(l.offset(1) == 2);
  CHECK(l.offset(2) == 5);
  CHECK_THROWS_AS(BlockLayout({2, 0}), DimensionError);
  CHECK_THROWS_AS(BlockLayout(std::vector<Index>{}), DimensionError);
}

TEST_CASE("uniform layout gives the remainder to leading blocks") {
  const BlockLayout l = BlockLayout::uniform(10, 4);
  CHECK(l.sizes() == std::vector<Index>{3, 3, 2, 2});
  CHECK_THROWS(BlockLayout::uniform(3, 4));
}

TEST_CASE("block_view slices") {
  CHECK(block_view(BlockLayout({2, 2}), vec({1, 2, 3, 4}), 1) == vec({3, 4}));
  CHECK(block_view(BlockLayout({4}), vec({1, 2, 3, 4}), 0) == vec({1, 2, 3, 4}));
  CHECK(block_view(BlockLayout({1, 3}), vec({5, 0, 0, 0}), 1) == vec({0, 0, 0}));
  CHECK_THROWS_AS(block_view(BlockLayout({2, 2}), vec({1, 2, 3, 4}), 2), IndexError);
  CHECK_THROWS_AS(block_view(BlockLayout({2, 2}), vec({1, 2, 3, 4}), -1), IndexError);
  CHECK_THROWS_AS(block_view(BlockLayout({2, 2}), vec({1, 2, 3}), 0), DimensionError);
}

TEST_CASE("embed places one block and zeros elsewhere") {
  const BlockLayout l({2, 2});
  CHECK(embed(l, vec({7, 8}), 0) == vec({7, 8, 0, 0}));
  CHECK(embed(l, vec({0, 0}), 1) == vec({0, 0, 0, 0}));
  CHECK_THROWS_AS(embed(l, vec({1, 2, 3}), 0), DimensionError);

  const BlockLayout odd({3, 1, 4});
  RngStream rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    for (Index s = 0; s < odd.num_blocks(); ++s) {
      const Vector g = rng.normal_vector(odd.size(s));
      const Vector full = embed(odd, g, s);
      CHECK(block_view(odd, full, s) == g);
      CHECK(full.norm() == doctest::Approx(g.norm()).epsilon(1e-15));
    }
  }
}

TEST_CASE("block_norm") {
  const BlockLayout l({2, 2});
  CHECK(block_norm(l, vec({3, 4, 0, 0}), 0) == 5.0);
  CHECK(block_norm(l, vec({3, 4, 0, 0}), 1) == 0.0);

  const BlockLayout odd({3, 1, 4});
  RngStream rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = rng.normal_vector(8);
    double sum = 0.0;
    for (Index s = 0; s < 3; ++s) sum += block_norm(odd, x, s) * block_norm(odd, x, s);
    CHECK(std::abs(sum - x.squaredNorm()) <= 1e-12 * x.squaredNorm());
  }
}

TEST_CASE("gather reconstructs the vector bitwise") {
  const BlockLayout l({3, 1, 4});
  RngStream rng(7);
  const Vector x = rng.normal_vector(8);
  std::vector<Vector> parts;
  for (Index s = 0; s < 3; ++s) parts.emplace_back(block_view(l, x, s));
  CHECK(gather(l, parts) == x);
  parts.pop_back();
  CHECK_THROWS_AS(gather(l, parts), DimensionError);
}
