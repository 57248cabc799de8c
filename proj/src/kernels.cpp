#include "sparsebench/kernels.hpp"

#include <algorithm>
#include <array>

namespace sparsebench {

namespace {

void check_spmv_dims(index_t m, index_t n, std::size_t xlen, std::size_t ylen) {
  if (xlen != static_cast<std::size_t>(n))
    throw DimensionError("x has length " + std::to_string(xlen) + ", expected " + std::to_string(n));
  if (ylen != static_cast<std::size_t>(m))
    throw DimensionError("y has length " + std::to_string(ylen) + ", expected " + std::to_string(m));
}

inline void spmv_rows(const CsrMatrix& a, const double* x, double* y, index_t begin, index_t end) {
  const index_t* rp = a.rptrs().data();
  const index_t* ci = a.cids().data();
  const double* v = a.values().data();
  for (index_t i = begin; i < end; ++i) {
    double sum = 0.0;
    for (index_t p = rp[i]; p < rp[i + 1]; ++p) sum += v[p] * x[ci[p]];
    y[i] = sum;
  }
}

void spmm_rows_generic(const CsrMatrix& a, const DenseMatrix& x, DenseMatrix& y, index_t begin,
                       index_t end) {
  const std::size_t k = x.cols();
  thread_local std::vector<double> acc;
  acc.resize(k);
  for (index_t i = begin; i < end; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    auto c = a.row_cids(i);
    auto v = a.row_values(i);
    for (std::size_t p = 0; p < c.size(); ++p) {
      const double value = v[p];
      const double* xr = x.row(c[p]).data();
      for (std::size_t j = 0; j < k; ++j) acc[j] += value * xr[j];
    }
    std::copy(acc.begin(), acc.end(), y.row(i).begin());
  }
}

void spmm_rows_wide(const CsrMatrix& a, const DenseMatrix& x, DenseMatrix& y, index_t begin,
                    index_t end) {
  constexpr std::size_t w = kSpmmWidth;
  const std::size_t k = x.cols();
  for (index_t i = begin; i < end; ++i) {
    auto c = a.row_cids(i);
    auto v = a.row_values(i);
    double* yr = y.row(i).data();
    for (std::size_t jb = 0; jb < k; jb += w) {
      std::array<double, w> acc{};
      for (std::size_t p = 0; p < c.size(); ++p) {
        const double value = v[p];
        const double* xr = x.row(c[p]).data() + jb;
        for (std::size_t l = 0; l < w; ++l) acc[l] += value * xr[l];
      }
      std::copy(acc.begin(), acc.end(), yr + jb);
    }
  }
}

constexpr std::array<BlockDims, 7> kBlockDims{{
    {8, 8}, {8, 4}, {8, 2}, {8, 1}, {4, 8}, {2, 8}, {1, 8}}};

}  // namespace

std::vector<double> spmv_serial(const CsrMatrix& a, std::span<const double> x) {
  std::vector<double> y(static_cast<std::size_t>(a.rows()));
  spmv_serial(a, x, y);
  return y;
}

void spmv_serial(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  check_spmv_dims(a.rows(), a.cols(), x.size(), y.size());
  spmv_rows(a, x.data(), y.data(), 0, a.rows());
}

std::vector<double> spmv_parallel(const CsrMatrix& a, std::span<const double> x, const Schedule& s) {
  std::vector<double> y(static_cast<std::size_t>(a.rows()));
  spmv_parallel(a, x, y, s);
  return y;
}

void spmv_parallel(const CsrMatrix& a, std::span<const double> x, std::span<double> y,
                   const Schedule& s) {
  check_spmv_dims(a.rows(), a.cols(), x.size(), y.size());
  const double* xp = x.data();
  double* yp = y.data();
  for_each_chunk(a.rows(), s, [&](index_t begin, index_t end) { spmv_rows(a, xp, yp, begin, end); });
}

DenseMatrix spmm(const CsrMatrix& a, const DenseMatrix& x, const Schedule& s, SpmmPath path) {
  DenseMatrix y(static_cast<std::size_t>(a.rows()), x.cols());
  spmm(a, x, y, s, path);
  return y;
}

void spmm(const CsrMatrix& a, const DenseMatrix& x, DenseMatrix& y, const Schedule& s,
          SpmmPath path) {
  if (x.rows() != static_cast<std::size_t>(a.cols()))
    throw DimensionError("X has " + std::to_string(x.rows()) + " rows, expected " +
                         std::to_string(a.cols()));
  if (y.rows() != static_cast<std::size_t>(a.rows()) || y.cols() != x.cols())
    throw DimensionError("Y must be " + std::to_string(a.rows()) + "x" + std::to_string(x.cols()));
  const bool wide_ok = x.cols() % kSpmmWidth == 0;
  if (path == SpmmPath::kWide && !wide_ok)
    throw DimensionError("wide SpMM path needs k to be a multiple of " + std::to_string(kSpmmWidth));
  const bool wide = path == SpmmPath::kWide || (path == SpmmPath::kAuto && wide_ok);
  for_each_chunk(a.rows(), s, [&](index_t begin, index_t end) {
    if (wide) spmm_rows_wide(a, x, y, begin, end);
    else spmm_rows_generic(a, x, y, begin, end);
  });
}

std::span<const BlockDims> supported_block_dims() { return kBlockDims; }

void validate_block_dims(BlockDims d) {
  if (std::find(kBlockDims.begin(), kBlockDims.end(), d) == kBlockDims.end())
    throw ConstructionError("unsupported block dims " + to_string(d) +
                            " (one dimension must be 8, the other 1, 2, 4 or 8)");
}

std::string to_string(BlockDims d) { return std::to_string(d.rows) + "x" + std::to_string(d.cols); }

BlockDims parse_block_dims(std::string_view s) {
  const auto x = s.find('x');
  if (x == std::string_view::npos) throw ConstructionError("block dims must look like 8x4");
  auto num = [&](std::string_view t) {
    if (t.empty() || t.size() > 2 || !std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; }))
      throw ConstructionError("bad block dims '" + std::string(s) + "'");
    return static_cast<index_t>(std::stoi(std::string(t)));
  };
  BlockDims d{num(s.substr(0, x)), num(s.substr(x + 1))};
  validate_block_dims(d);
  return d;
}

BlockLayout default_layout(BlockDims d) {
  return d.rows == 8 && d.cols != 8 ? BlockLayout::kColMajor : BlockLayout::kRowMajor;
}

BlockedMatrix to_blocked(const CsrMatrix& a, BlockDims dims, BlockLayout layout) {
  validate_block_dims(dims);
  BlockedMatrix bm;
  bm.m_ = a.rows();
  bm.n_ = a.cols();
  bm.dims_ = dims;
  bm.layout_ = layout;
  const index_t ar = dims.rows;
  const index_t bc = dims.cols;
  const index_t nbr = (a.rows() + ar - 1) / ar;
  const index_t nbc = (a.cols() + bc - 1) / bc;
  const std::size_t bsize = static_cast<std::size_t>(ar) * bc;

  bm.brptrs_.assign(static_cast<std::size_t>(nbr) + 1, 0);
  std::vector<index_t> owner(static_cast<std::size_t>(nbc), -1);
  std::vector<index_t> local(static_cast<std::size_t>(nbc), 0);
  std::vector<index_t> cols;
  for (index_t br = 0; br < nbr; ++br) {
    const index_t r0 = br * ar;
    const index_t r1 = std::min(a.rows(), r0 + ar);
    cols.clear();
    for (index_t i = r0; i < r1; ++i)
      for (index_t c : a.row_cids(i)) {
        const index_t b = c / bc;
        if (owner[b] != br) {
          owner[b] = br;
          cols.push_back(b);
        }
      }
    std::sort(cols.begin(), cols.end());
    const std::size_t first = bm.bcids_.size();
    for (std::size_t q = 0; q < cols.size(); ++q) {
      local[cols[q]] = static_cast<index_t>(q);
      bm.bcids_.push_back(cols[q]);
    }
    bm.bval_.resize(bm.bcids_.size() * bsize, 0.0);
    for (index_t i = r0; i < r1; ++i) {
      auto c = a.row_cids(i);
      auto v = a.row_values(i);
      for (std::size_t p = 0; p < c.size(); ++p) {
        const std::size_t blk = first + static_cast<std::size_t>(local[c[p] / bc]);
        bm.bval_[blk * bsize + bm.slot(i - r0, c[p] % bc)] = v[p];
      }
    }
    bm.brptrs_[br + 1] = static_cast<index_t>(bm.bcids_.size());
  }
  return bm;
}

std::size_t count_blocks(const CsrMatrix& a, BlockDims dims) {
  validate_block_dims(dims);
  const index_t nbr = (a.rows() + dims.rows - 1) / dims.rows;
  const index_t nbc = (a.cols() + dims.cols - 1) / dims.cols;
  std::vector<index_t> owner(static_cast<std::size_t>(nbc), -1);
  std::size_t total = 0;
  for (index_t br = 0; br < nbr; ++br) {
    const index_t r1 = std::min(a.rows(), (br + 1) * dims.rows);
    for (index_t i = br * dims.rows; i < r1; ++i)
      for (index_t c : a.row_cids(i)) {
        const index_t b = c / dims.cols;
        if (owner[b] != br) {
          owner[b] = br;
          ++total;
        }
      }
  }
  return total;
}

std::vector<double> spmv_blocked(const BlockedMatrix& bm, std::span<const double> x,
                                 const Schedule& s) {
  std::vector<double> y(static_cast<std::size_t>(bm.rows()));
  spmv_blocked(bm, x, y, s);
  return y;
}

void spmv_blocked(const BlockedMatrix& bm, std::span<const double> x, std::span<double> y,
                  const Schedule& s) {
  check_spmv_dims(bm.rows(), bm.cols(), x.size(), y.size());
  const index_t ar = bm.dims().rows;
  const index_t bc = bm.dims().cols;
  const bool row_major = bm.layout() == BlockLayout::kRowMajor;
  const auto brp = bm.brptrs();
  const auto bcid = bm.bcids();
  const double* xp = x.data();
  double* yp = y.data();
  const index_t n = bm.cols();
  const index_t m = bm.rows();

  for_each_chunk(bm.block_rows(), s, [&](index_t begin, index_t end) {
    for (index_t br = begin; br < end; ++br) {
      std::array<double, 8> acc{};
      for (index_t k = brp[br]; k < brp[br + 1]; ++k) {
        const double* blk = bm.block(static_cast<std::size_t>(k)).data();
        const index_t c0 = bcid[k] * bc;
        const index_t width = std::min(bc, n - c0);
        const double* xs = xp + c0;
        if (row_major) {
          for (index_t r = 0; r < ar; ++r)
            for (index_t c = 0; c < width; ++c) acc[r] += blk[r * bc + c] * xs[c];
        } else {
          // One pack of `ar` values per block column.
          for (index_t c = 0; c < width; ++c)
            for (index_t r = 0; r < ar; ++r) acc[r] += blk[c * ar + r] * xs[c];
        }
      }
      const index_t r0 = br * ar;
      const index_t rows = std::min(ar, m - r0);
      for (index_t r = 0; r < rows; ++r) yp[r0 + r] = acc[r];
    }
  });
}

std::uint64_t blocked_footprint_bytes(std::size_t blocks, std::size_t block_rows, BlockDims d) {
  return static_cast<std::uint64_t>(blocks) * block_cost_bytes(d) +
         4ull * (static_cast<std::uint64_t>(block_rows) + 1);
}

std::uint64_t blocked_footprint_bytes(const BlockedMatrix& bm) {
  return blocked_footprint_bytes(bm.num_blocks(), static_cast<std::size_t>(bm.block_rows()), bm.dims());
}

std::uint64_t csr_footprint_bytes(const CsrMatrix& a) {
  return 12ull * a.nnz() + 4ull * (static_cast<std::uint64_t>(a.rows()) + 1);
}

}  // namespace sparsebench
