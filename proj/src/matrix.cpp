#include "sparsebench/matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

namespace sparsebench {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_)
    throw DimensionError("dense data length " + std::to_string(data_.size()) + " != " +
                         std::to_string(rows_) + "x" + std::to_string(cols_));
}

CsrMatrix::CsrMatrix(index_t m, index_t n, std::vector<index_t> rptrs,
                     std::vector<index_t> cids, std::vector<double> val)
    : m_(m), n_(n), rptrs_(std::move(rptrs)), cids_(std::move(cids)), val_(std::move(val)) {
  if (m_ < 0 || n_ < 0) throw ConstructionError("negative matrix dimension");
  if (rptrs_.size() != static_cast<std::size_t>(m_) + 1)
    throw ConstructionError("rptrs must have m+1 entries");
  if (cids_.size() != val_.size()) throw ConstructionError("cids and val lengths differ");
  if (rptrs_.front() != 0) throw ConstructionError("rptrs[0] must be 0");
  if (static_cast<std::size_t>(rptrs_.back()) != cids_.size())
    throw ConstructionError("rptrs[m] must equal the number of nonzeros");
  for (index_t i = 0; i < m_; ++i) {
    if (rptrs_[i + 1] < rptrs_[i])
      throw ConstructionError("rptrs decreases at row " + std::to_string(i));
    for (index_t p = rptrs_[i]; p < rptrs_[i + 1]; ++p) {
      if (cids_[p] < 0 || cids_[p] >= n_)
        throw ConstructionError("column " + std::to_string(cids_[p]) + " out of range in row " +
                                std::to_string(i));
      if (p > rptrs_[i] && cids_[p] <= cids_[p - 1])
        throw ConstructionError("columns not strictly increasing in row " + std::to_string(i));
    }
  }
}

CsrMatrix CsrMatrix::identity(index_t n) {
  std::vector<index_t> rptrs(static_cast<std::size_t>(n) + 1);
  std::iota(rptrs.begin(), rptrs.end(), 0);
  std::vector<index_t> cids(static_cast<std::size_t>(n));
  std::iota(cids.begin(), cids.end(), 0);
  return CsrMatrix(n, n, std::move(rptrs), std::move(cids),
                   std::vector<double>(static_cast<std::size_t>(n), 1.0));
}

Permutation::Permutation(std::vector<index_t> perm) : perm_(std::move(perm)) {
  if (perm_.size() > static_cast<std::size_t>(std::numeric_limits<index_t>::max()))
    throw ConstructionError("permutation too large");
  std::vector<char> seen(perm_.size(), 0);
  for (std::size_t i = 0; i < perm_.size(); ++i) {
    const index_t v = perm_[i];
    if (v < 0 || static_cast<std::size_t>(v) >= perm_.size() || seen[v])
      throw ConstructionError("not a bijection at position " + std::to_string(i));
    seen[v] = 1;
  }
}

Permutation Permutation::identity(index_t size) {
  std::vector<index_t> p(static_cast<std::size_t>(size));
  std::iota(p.begin(), p.end(), 0);
  return Permutation(std::move(p));
}

Permutation Permutation::inverse() const {
  std::vector<index_t> inv(perm_.size());
  for (std::size_t i = 0; i < perm_.size(); ++i) inv[perm_[i]] = static_cast<index_t>(i);
  return Permutation(std::move(inv));
}

CsrMatrix csr_from_coo(const CooEntries& coo) {
  if (coo.m < 0 || coo.n < 0) throw ConstructionError("negative matrix dimension");
  const auto m = static_cast<std::size_t>(coo.m);
  for (std::size_t e = 0; e < coo.entries.size(); ++e) {
    const auto& t = coo.entries[e];
    if (t.row < 0 || t.row >= coo.m || t.col < 0 || t.col >= coo.n)
      throw ConstructionError("entry " + std::to_string(e) + " (" + std::to_string(t.row) + ", " +
                              std::to_string(t.col) + ") outside " + std::to_string(coo.m) +
                              "x" + std::to_string(coo.n));
  }

  // Bucket by row (stable), then sort and merge each row.
  std::vector<std::size_t> count(m + 1, 0);
  for (const auto& t : coo.entries) ++count[t.row + 1];
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<std::pair<index_t, double>> bucket(coo.entries.size());
  {
    std::vector<std::size_t> next(count.begin(), count.end() - 1);
    for (const auto& t : coo.entries) bucket[next[t.row]++] = {t.col, t.value};
  }

  std::vector<index_t> rptrs(m + 1, 0);
  std::vector<index_t> cids;
  std::vector<double> val;
  cids.reserve(bucket.size());
  val.reserve(bucket.size());
  for (std::size_t i = 0; i < m; ++i) {
    auto first = bucket.begin() + static_cast<std::ptrdiff_t>(count[i]);
    auto last = bucket.begin() + static_cast<std::ptrdiff_t>(count[i + 1]);
    std::stable_sort(first, last, [](const auto& x, const auto& y) { return x.first < y.first; });
    for (auto it = first; it != last; ++it) {
      if (!cids.empty() && cids.size() > static_cast<std::size_t>(rptrs[i]) &&
          cids.back() == it->first) {
        val.back() += it->second;
      } else {
        cids.push_back(it->first);
        val.push_back(it->second);
      }
    }
    if (cids.size() > static_cast<std::size_t>(std::numeric_limits<index_t>::max()))
      throw ConstructionError("nonzero count exceeds 32-bit index range");
    rptrs[i + 1] = static_cast<index_t>(cids.size());
  }
  return CsrMatrix(coo.m, coo.n, std::move(rptrs), std::move(cids), std::move(val));
}

DenseMatrix csr_to_dense(const CsrMatrix& a) {
  const auto m = static_cast<std::size_t>(a.rows());
  const auto n = static_cast<std::size_t>(a.cols());
  if (n != 0 && m > std::numeric_limits<std::size_t>::max() / sizeof(double) / n)
    throw DimensionError("dense size overflow for " + std::to_string(m) + "x" + std::to_string(n));
  DenseMatrix d(m, n);
  for (index_t i = 0; i < a.rows(); ++i) {
    auto c = a.row_cids(i);
    auto v = a.row_values(i);
    for (std::size_t p = 0; p < c.size(); ++p) d(i, c[p]) = v[p];
  }
  return d;
}

std::uint64_t stencil5_nnz(std::uint64_t s) noexcept {
  if (s == 0) return 0;
  if (s == 1) return 1;
  return 5 * (s - 2) * (s - 2) + 16 * (s - 2) + 12;
}

CsrMatrix gen_stencil5(index_t side) {
  if (side < 1) throw ConstructionError("stencil side must be >= 1");
  const auto s = static_cast<std::int64_t>(side);
  if (5 * s * s > std::numeric_limits<index_t>::max())
    throw ConstructionError("stencil side " + std::to_string(side) +
                            " exceeds the 32-bit index range");
  const auto n = static_cast<index_t>(s * s);
  std::vector<index_t> rptrs(static_cast<std::size_t>(n) + 1);
  std::vector<index_t> cids;
  cids.reserve(stencil5_nnz(static_cast<std::uint64_t>(s)));
  rptrs[0] = 0;
  for (index_t i = 0; i < side; ++i) {
    for (index_t j = 0; j < side; ++j) {
      const index_t p = i * side + j;
      if (i > 0) cids.push_back(p - side);
      if (j > 0) cids.push_back(p - 1);
      cids.push_back(p);
      if (j + 1 < side) cids.push_back(p + 1);
      if (i + 1 < side) cids.push_back(p + side);
      rptrs[p + 1] = static_cast<index_t>(cids.size());
    }
  }
  std::vector<double> val(cids.size(), 1.0);
  return CsrMatrix(n, n, std::move(rptrs), std::move(cids), std::move(val));
}

MatrixStats compute_stats(const CsrMatrix& a) {
  MatrixStats st;
  st.rows = a.rows();
  st.cols = a.cols();
  st.nonzeros = a.nnz();
  const double cells = static_cast<double>(a.rows()) * static_cast<double>(a.cols());
  st.density = cells > 0 ? static_cast<double>(a.nnz()) / cells : 0.0;
  st.avg_nnz_per_row =
      a.rows() > 0 ? static_cast<double>(a.nnz()) / static_cast<double>(a.rows()) : 0.0;
  for (index_t i = 0; i < a.rows(); ++i) st.max_nnz_per_row = std::max(st.max_nnz_per_row, a.row_nnz(i));
  std::vector<index_t> per_col(static_cast<std::size_t>(a.cols()), 0);
  for (index_t c : a.cids()) ++per_col[c];
  if (!per_col.empty()) st.max_nnz_per_col = *std::max_element(per_col.begin(), per_col.end());
  return st;
}

CsrMatrix permute_symmetric(const CsrMatrix& a, const Permutation& p) {
  if (!a.square())
    throw DimensionError("permute_symmetric needs a square matrix, got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  if (p.size() != a.rows())
    throw DimensionError("permutation size " + std::to_string(p.size()) + " != matrix order " +
                         std::to_string(a.rows()));
  const Permutation inv = p.inverse();
  const index_t n = a.rows();
  std::vector<index_t> rptrs(static_cast<std::size_t>(n) + 1, 0);
  std::vector<index_t> cids;
  std::vector<double> val;
  cids.reserve(a.nnz());
  val.reserve(a.nnz());
  std::vector<std::pair<index_t, double>> row;
  for (index_t r = 0; r < n; ++r) {
    const index_t old = inv[r];
    auto c = a.row_cids(old);
    auto v = a.row_values(old);
    row.clear();
    for (std::size_t q = 0; q < c.size(); ++q) row.emplace_back(p[c[q]], v[q]);
    std::sort(row.begin(), row.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (const auto& [col, value] : row) {
      cids.push_back(col);
      val.push_back(value);
    }
    rptrs[r + 1] = static_cast<index_t>(cids.size());
  }
  return CsrMatrix(n, n, std::move(rptrs), std::move(cids), std::move(val));
}

namespace {

std::string fixed2(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

double truncate2(double x) { return std::floor(x * 100.0 + 1e-9) / 100.0; }

}  // namespace

std::string format_density(double density) {
  if (!(density > 0.0)) return "0.00e+00";
  int exponent = static_cast<int>(std::floor(std::log10(density)));
  double mantissa = density / std::pow(10.0, exponent);
  if (mantissa >= 10.0) {
    mantissa /= 10.0;
    ++exponent;
  } else if (mantissa < 1.0) {
    mantissa *= 10.0;
    --exponent;
  }
  std::string out = fixed2(truncate2(mantissa));
  out += exponent < 0 ? "e-" : "e+";
  const int mag = exponent < 0 ? -exponent : exponent;
  if (mag < 10) out += '0';
  out += std::to_string(mag);
  return out;
}

std::string format_avg(double avg) { return fixed2(truncate2(avg)); }

}  // namespace sparsebench
