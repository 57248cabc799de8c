#pragma once

// CSR SpMV/SpMM and register-blocked (BCRS) SpMV.
//
// Per-row accumulation always runs over the stored nonzeros in storage
// order starting from 0.0, whatever the schedule or code path, so every
// CSR kernel here is bitwise reproducible.

#include <cstdint>
#include <span>
#include <vector>

#include "sparsebench/matrix.hpp"
#include "sparsebench/schedule.hpp"

namespace sparsebench {

std::vector<double> spmv_serial(const CsrMatrix& a, std::span<const double> x);
void spmv_serial(const CsrMatrix& a, std::span<const double> x, std::span<double> y);

std::vector<double> spmv_parallel(const CsrMatrix& a, std::span<const double> x,
                                  const Schedule& s);
void spmv_parallel(const CsrMatrix& a, std::span<const double> x, std::span<double> y,
                   const Schedule& s);

/// Number of dense columns processed per step by the wide SpMM path.
inline constexpr std::size_t kSpmmWidth = 8;

enum class SpmmPath {
  kAuto,     // wide when k % kSpmmWidth == 0, generic otherwise
  kGeneric,  // one k-length accumulator per row
  kWide,     // kSpmmWidth-column register tiles; requires k % kSpmmWidth == 0
};

/// Y = A X with X row-major (n x k).
DenseMatrix spmm(const CsrMatrix& a, const DenseMatrix& x, const Schedule& s,
                 SpmmPath path = SpmmPath::kAuto);
void spmm(const CsrMatrix& a, const DenseMatrix& x, DenseMatrix& y, const Schedule& s,
          SpmmPath path = SpmmPath::kAuto);

enum class BlockLayout { kRowMajor, kColMajor };

struct BlockDims {
  index_t rows = 8;  // a
  index_t cols = 8;  // b

  friend bool operator==(const BlockDims&, const BlockDims&) = default;
};

/// The seven supported configurations: 8x8 8x4 8x2 8x1 4x8 2x8 1x8.
std::span<const BlockDims> supported_block_dims();
void validate_block_dims(BlockDims d);
BlockDims parse_block_dims(std::string_view s);  // "8x4"
std::string to_string(BlockDims d);

/// Layout whose packs of 8 run along the dimension of size 8
/// (column-major for a x b with a = 8 > b, row-major otherwise).
BlockLayout default_layout(BlockDims d);

/// BCRS storage: a CSR skeleton over the grid of a x b blocks plus dense
/// block payloads with explicit zeros. Only blocks holding at least one
/// source nonzero are stored.
class BlockedMatrix {
public:
  index_t rows() const noexcept { return m_; }
  index_t cols() const noexcept { return n_; }
  BlockDims dims() const noexcept { return dims_; }
  BlockLayout layout() const noexcept { return layout_; }
  index_t block_rows() const noexcept { return static_cast<index_t>(brptrs_.size()) - 1; }
  index_t block_cols() const noexcept { return dims_.cols == 0 ? 0 : (n_ + dims_.cols - 1) / dims_.cols; }
  std::size_t num_blocks() const noexcept { return bcids_.size(); }

  std::span<const index_t> brptrs() const noexcept { return brptrs_; }
  std::span<const index_t> bcids() const noexcept { return bcids_; }
  std::span<const double> bval() const noexcept { return bval_; }

  /// Flat offset of element (r, c) inside one block.
  std::size_t slot(index_t r, index_t c) const noexcept {
    return layout_ == BlockLayout::kRowMajor
               ? static_cast<std::size_t>(r) * dims_.cols + c
               : static_cast<std::size_t>(c) * dims_.rows + r;
  }
  std::span<const double> block(std::size_t k) const noexcept {
    const auto sz = static_cast<std::size_t>(dims_.rows) * dims_.cols;
    return {bval_.data() + k * sz, sz};
  }

private:
  friend BlockedMatrix to_blocked(const CsrMatrix&, BlockDims, BlockLayout);

  index_t m_ = 0;
  index_t n_ = 0;
  BlockDims dims_{};
  BlockLayout layout_ = BlockLayout::kRowMajor;
  std::vector<index_t> brptrs_{0};
  std::vector<index_t> bcids_;
  std::vector<double> bval_;
};

BlockedMatrix to_blocked(const CsrMatrix& a, BlockDims dims, BlockLayout layout);
inline BlockedMatrix to_blocked(const CsrMatrix& a, BlockDims dims) {
  return to_blocked(a, dims, default_layout(dims));
}

/// Number of non-empty a x b blocks, without materializing them.
std::size_t count_blocks(const CsrMatrix& a, BlockDims dims);

/// The schedule's chunk counts block rows.
std::vector<double> spmv_blocked(const BlockedMatrix& bm, std::span<const double> x,
                                 const Schedule& s);
void spmv_blocked(const BlockedMatrix& bm, std::span<const double> x, std::span<double> y,
                  const Schedule& s);

/// Bytes for one stored block: 8 per value plus a 4-byte block-column id.
constexpr std::uint64_t block_cost_bytes(BlockDims d) noexcept {
  return 8ull * static_cast<std::uint64_t>(d.rows) * static_cast<std::uint64_t>(d.cols) + 4ull;
}

/// blocks * (8ab + 4) + 4 * (block_rows + 1).
std::uint64_t blocked_footprint_bytes(const BlockedMatrix& bm);
std::uint64_t blocked_footprint_bytes(std::size_t blocks, std::size_t block_rows, BlockDims d);

/// 12 * nnz + 4 * (rows + 1).
std::uint64_t csr_footprint_bytes(const CsrMatrix& a);

}  // namespace sparsebench
