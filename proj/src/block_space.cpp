#include "zoblock/block_space.hpp"

#include <string>

#include "zoblock/errors.hpp"

namespace zoblock {

BlockLayout::BlockLayout(std::vector<Index> block_sizes) : sizes_(std::move(block_sizes)) {
  if (sizes_.empty()) throw DimensionError("block layout needs at least one block");
  offsets_.reserve(sizes_.size());
  for (Index n_s : sizes_) {
    if (n_s < 1) throw DimensionError("block sizes must be positive, got " + std::to_string(n_s));
    offsets_.push_back(n_);
    n_ += n_s;
  }
}

BlockLayout BlockLayout::uniform(Index n, Index b) {
  if (b < 1 || n < b) {
    throw DimensionError("cannot split dimension " + std::to_string(n) + " into " +
                         std::to_string(b) + " nonempty blocks");
  }
  std::vector<Index> sizes(static_cast<std::size_t>(b), n / b);
  for (Index s = 0; s < n % b; ++s) ++sizes[static_cast<std::size_t>(s)];
  return BlockLayout(std::move(sizes));
}

void BlockLayout::check_block(Index s) const {
  if (s < 0 || s >= num_blocks()) {
    throw IndexError("block index " + std::to_string(s) + " outside [0, " +
                     std::to_string(num_blocks()) + ")");
  }
}

void BlockLayout::check_vector(const Vector& x, const char* what) const {
  if (x.size() != n_) {
    throw DimensionError(std::string(what) + " has length " + std::to_string(x.size()) +
                         ", layout dimension is " + std::to_string(n_));
  }
}

Index BlockLayout::size(Index s) const {
  check_block(s);
  return sizes_[static_cast<std::size_t>(s)];
}

Index BlockLayout::offset(Index s) const {
  check_block(s);
  return offsets_[static_cast<std::size_t>(s)];
}

Eigen::VectorBlock<const Vector> block_view(const BlockLayout& layout, const Vector& x, Index s) {
  layout.check_vector(x);
  return x.segment(layout.offset(s), layout.size(s));
}

Eigen::VectorBlock<Vector> block_view(const BlockLayout& layout, Vector& x, Index s) {
  layout.check_vector(x);
  return x.segment(layout.offset(s), layout.size(s));
}

Vector embed(const BlockLayout& layout, const Vector& g_s, Index s) {
  if (g_s.size() != layout.size(s)) {
    throw DimensionError("block " + std::to_string(s) + " has size " +
                         std::to_string(layout.size(s)) + ", got vector of length " +
                         std::to_string(g_s.size()));
  }
  Vector out = Vector::Zero(layout.dimension());
  out.segment(layout.offset(s), g_s.size()) = g_s;
  return out;
}

double block_norm(const BlockLayout& layout, const Vector& x, Index s) {
  return block_view(layout, x, s).norm();
}

Vector gather(const BlockLayout& layout, const std::vector<Vector>& blocks) {
  if (static_cast<Index>(blocks.size()) != layout.num_blocks()) {
    throw DimensionError("gather expects " + std::to_string(layout.num_blocks()) +
                         " blocks, got " + std::to_string(blocks.size()));
  }
  Vector out(layout.dimension());
  for (Index s = 0; s < layout.num_blocks(); ++s) {
    const Vector& g = blocks[static_cast<std::size_t>(s)];
    if (g.size() != layout.size(s)) throw DimensionError("gather: block size mismatch");
    out.segment(layout.offset(s), g.size()) = g;
  }
  return out;
}

}  // namespace zoblock
