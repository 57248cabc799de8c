#pragma once

// Sparse (CSR) and dense matrix types, permutations and Table-style
// statistics. Values are double precision, indices 32-bit.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sparsebench/error.hpp"

namespace sparsebench {

using index_t = std::int32_t;

struct CooEntry {
  index_t row = 0;
  index_t col = 0;
  double value = 0.0;
};

/// Coordinate-list ingestion intermediate. May contain duplicates until it
/// is turned into a CsrMatrix.
struct CooEntries {
  index_t m = 0;
  index_t n = 0;
  std::vector<CooEntry> entries;
};

class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Compressed row storage. Immutable once built; the constructor validates
/// every structural invariant (row pointers monotone, columns strictly
/// increasing within a row and in range).
class CsrMatrix {
public:
  CsrMatrix() : rptrs_(1, 0) {}
  CsrMatrix(index_t m, index_t n, std::vector<index_t> rptrs, std::vector<index_t> cids,
            std::vector<double> val);

  static CsrMatrix identity(index_t n);

  index_t rows() const noexcept { return m_; }
  index_t cols() const noexcept { return n_; }
  std::size_t nnz() const noexcept { return cids_.size(); }
  bool square() const noexcept { return m_ == n_; }

  std::span<const index_t> rptrs() const noexcept { return rptrs_; }
  std::span<const index_t> cids() const noexcept { return cids_; }
  std::span<const double> values() const noexcept { return val_; }

  index_t row_nnz(index_t i) const noexcept { return rptrs_[i + 1] - rptrs_[i]; }
  std::span<const index_t> row_cids(index_t i) const noexcept {
    return {cids_.data() + rptrs_[i], static_cast<std::size_t>(row_nnz(i))};
  }
  std::span<const double> row_values(index_t i) const noexcept {
    return {val_.data() + rptrs_[i], static_cast<std::size_t>(row_nnz(i))};
  }

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

private:
  index_t m_ = 0;
  index_t n_ = 0;
  std::vector<index_t> rptrs_;
  std::vector<index_t> cids_;
  std::vector<double> val_;
};

/// perm[i] is the new index of old row/column i.
class Permutation {
public:
  Permutation() = default;
  explicit Permutation(std::vector<index_t> perm);

  static Permutation identity(index_t size);

  index_t size() const noexcept { return static_cast<index_t>(perm_.size()); }
  index_t operator[](index_t old_index) const noexcept { return perm_[old_index]; }
  std::span<const index_t> values() const noexcept { return perm_; }

  /// inverse()[new] = old.
  Permutation inverse() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

private:
  std::vector<index_t> perm_;
};

struct MatrixStats {
  index_t rows = 0;
  index_t cols = 0;
  std::size_t nonzeros = 0;
  double density = 0.0;
  double avg_nnz_per_row = 0.0;
  index_t max_nnz_per_row = 0;
  index_t max_nnz_per_col = 0;
};

/// Sums duplicates and sorts columns within each row.
CsrMatrix csr_from_coo(const CooEntries& coo);

/// Throws DimensionError if rows*cols does not fit in memory addressing.
DenseMatrix csr_to_dense(const CsrMatrix& a);

/// 5-point stencil on an s x s grid, row p = i*s + j, all values 1.0.
CsrMatrix gen_stencil5(index_t side);

/// Closed-form nonzero count of gen_stencil5(side).
std::uint64_t stencil5_nnz(std::uint64_t side) noexcept;

MatrixStats compute_stats(const CsrMatrix& a);

/// B[p(i)][p(j)] = A[i][j].
CsrMatrix permute_symmetric(const CsrMatrix& a, const Permutation& p);

// Display helpers. The published statistics tables truncate rather than
// round: density to three significant digits, nnz/row to two decimals.
std::string format_density(double density);
std::string format_avg(double avg);

}  // namespace sparsebench
