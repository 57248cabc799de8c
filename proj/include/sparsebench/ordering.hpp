#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sparsebench/matrix.hpp"

namespace sparsebench {

/// Undirected graph of the pattern of A + A^T, self-loops dropped.
/// Neighbor lists are sorted ascending.
class AdjacencyView {
public:
  explicit AdjacencyView(const CsrMatrix& a);

  index_t size() const noexcept { return static_cast<index_t>(ptr_.size()) - 1; }
  index_t degree(index_t v) const noexcept { return ptr_[v + 1] - ptr_[v]; }
  std::span<const index_t> neighbors(index_t v) const noexcept {
    return {adj_.data() + ptr_[v], static_cast<std::size_t>(degree(v))};
  }

private:
  std::vector<index_t> ptr_;
  std::vector<index_t> adj_;
};

/// max |i - j| over stored entries; 0 for empty or diagonal matrices.
index_t matrix_bandwidth(const CsrMatrix& a);

/// Reverse Cuthill-McKee ordering. Each connected component starts from a
/// pseudo-peripheral vertex (George-Liu); neighbors are visited by
/// ascending degree then ascending index. Isolated vertices follow all
/// components in ascending index order.
Permutation rcm_order(const CsrMatrix& a);

}  // namespace sparsebench
