#pragma once

// Performance model: useful cacheline density, byte-volume formulas, the
// per-core input-vector cache model and block fill/break-even analysis.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sparsebench/kernels.hpp"
#include "sparsebench/matrix.hpp"

namespace sparsebench {

/// Doubles per 64-byte cacheline.
inline constexpr index_t kDoublesPerLine = 8;

/// flops / bytes for CSR SpMV when only the 12 bytes per nonzero move.
inline constexpr double kSpmvFlopToByte = 2.0 / 12.0;

/// Nonnegative rational kept in lowest terms.
struct Fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Fraction make(std::uint64_t num, std::uint64_t den);
  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

struct RowUcld {
  index_t row;
  Fraction density;
};

struct UcldReport {
  double mean = 0.0;           // over nonempty rows
  std::vector<RowUcld> rows;   // nonempty rows only
};

/// nnz / (8 * distinct aligned lines) for one row's (ascending) columns.
Fraction ucld_row(std::span<const index_t> sorted_cids);

/// Throws MetricError when the matrix has no nonzeros.
UcldReport ucld(const CsrMatrix& a);

std::uint64_t spmv_flops(const CsrMatrix& a) noexcept;
std::uint64_t spmm_flops(const CsrMatrix& a, std::uint64_t k) noexcept;

struct SpmvBytes {
  std::uint64_t naive = 0;        // 12 tau
  std::uint64_t application = 0;  // 8m + 8n + 4(m+1) + 12 tau (= 4 + 20n + 12 tau when square)
};

SpmvBytes spmv_bytes(const CsrMatrix& a) noexcept;

/// 8mk + 8nk + 4(m+1) + 12 tau.
std::uint64_t spmm_bytes(const CsrMatrix& a, std::uint64_t k);

struct CacheModelConfig {
  unsigned cores = 61;
  index_t chunk_rows = 64;
  std::uint64_t cacheline_bytes = 64;
  std::optional<std::uint64_t> cache_capacity_bytes = 512 * 1024;  // nullopt = infinite

  static CacheModelConfig infinite(unsigned cores = 61, index_t chunk_rows = 64);
  void validate() const;
};

struct CacheModelReport {
  std::vector<std::uint64_t> per_core_misses;
  std::uint64_t total_misses = 0;
  std::uint64_t total_vector_bytes = 0;  // cacheline_bytes * total_misses
  double vector_access_ratio = 0.0;      // total_vector_bytes / (8 n k)
  std::uint64_t distinct_lines = 0;      // lines touched by any core
  double touched_fraction = 0.0;         // distinct_lines / lines in the vector
};

/// Replays the rows of each core (chunk c runs on core c mod cores) and
/// counts input-operand cacheline misses. With a finite capacity the cache is
/// a fully associative LRU holding only input-operand lines. `k` is the
/// number of dense columns (1 for SpMV); row j of the operand occupies
/// bytes [8kj, 8k(j+1)).
CacheModelReport vector_access_model(const CsrMatrix& a, const CacheModelConfig& cfg,
                                     std::uint64_t k = 1);

struct BandwidthModel {
  std::uint64_t naive_bytes = 0;
  std::uint64_t application_bytes = 0;
  std::uint64_t estimated_actual_bytes = 0;  // input-operand term replaced by modeled traffic
};

/// k == 0 selects the SpMV formulas, k >= 1 SpMM.
BandwidthModel bandwidth_model(const CsrMatrix& a, std::uint64_t k,
                               const CacheModelReport& vector_model);

/// GB/s and GFlop/s (1e9 based). Throw MetricError unless seconds > 0.
double effective_bandwidth(std::uint64_t bytes, double seconds);
double gflops(std::uint64_t flops, double seconds);

struct BlockDensity {
  BlockDims dims;
  std::size_t blocks = 0;
  double fill_ratio = 0.0;             // tau / (blocks * a * b)
  std::uint64_t break_even_nnz = 0;    // smallest z with 12 z > 8ab + 4
  double break_even_density = 0.0;     // break_even_nnz / (a * b)
  std::uint64_t blocked_bytes = 0;
  std::uint64_t csr_bytes = 0;
  bool saves_memory = false;           // blocked_bytes < csr_bytes
};

std::uint64_t break_even_nnz(BlockDims d) noexcept;

/// Per-block comparison: z nonzeros cost 12 z bytes in CSR against
/// block_cost_bytes(d) when blocked. A tie does not save.
constexpr bool block_saves_memory(BlockDims d, std::uint64_t z) noexcept {
  return block_cost_bytes(d) < 12 * z;
}
BlockDensity block_density_analysis(const CsrMatrix& a, BlockDims dims);

}  // namespace sparsebench
