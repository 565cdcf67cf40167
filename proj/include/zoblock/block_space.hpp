#pragma once

#include <Eigen/Core>
#include <vector>

namespace zoblock {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Partition of R^n into b contiguous blocks. Decision vectors are plain
// Vectors read through a layout.
class BlockLayout {
 public:
  BlockLayout() = default;
  explicit BlockLayout(std::vector<Index> block_sizes);

  // Near-equal split of n coordinates into b blocks; leading blocks take the remainder.
  static BlockLayout uniform(Index n, Index b);

  Index dimension() const { return n_; }
  Index num_blocks() const { return static_cast<Index>(sizes_.size()); }
  Index size(Index s) const;
  Index offset(Index s) const;
  const std::vector<Index>& sizes() const { return sizes_; }

  void check_block(Index s) const;
  void check_vector(const Vector& x, const char* what = "vector") const;

  bool operator==(const BlockLayout& other) const { return sizes_ == other.sizes_; }

 private:
  std::vector<Index> sizes_;
  std::vector<Index> offsets_;
  Index n_ = 0;
};

Eigen::VectorBlock<const Vector> block_view(const BlockLayout& layout, const Vector& x, Index s);
Eigen::VectorBlock<Vector> block_view(const BlockLayout& layout, Vector& x, Index s);

Vector embed(const BlockLayout& layout, const Vector& g_s, Index s);

double block_norm(const BlockLayout& layout, const Vector& x, Index s);

Vector gather(const BlockLayout& layout, const std::vector<Vector>& blocks);

}  // namespace zoblock
