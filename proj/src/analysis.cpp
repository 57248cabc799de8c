#include "sparsebench/analysis.hpp"

#include <numeric>

namespace sparsebench {

Fraction Fraction::make(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw MetricError("fraction with zero denominator");
  const std::uint64_t g = std::gcd(num, den);
  return g == 0 ? Fraction{0, 1} : Fraction{num / g, den / g};
}

Fraction ucld_row(std::span<const index_t> sorted_cids) {
  if (sorted_cids.empty()) throw MetricError("UCLD undefined for an empty row");
  std::uint64_t lines = 0;
  index_t last = -1;
  for (index_t c : sorted_cids) {
    const index_t line = c / kDoublesPerLine;
    if (line != last) {
      ++lines;
      last = line;
    }
  }
  return Fraction::make(sorted_cids.size(), lines * kDoublesPerLine);
}

UcldReport ucld(const CsrMatrix& a) {
  if (a.nnz() == 0) throw MetricError("UCLD undefined for a matrix without nonzeros");
  UcldReport rep;
  double sum = 0.0;
  for (index_t i = 0; i < a.rows(); ++i) {
    if (a.row_nnz(i) == 0) continue;
    const Fraction f = ucld_row(a.row_cids(i));
    rep.rows.push_back({i, f});
    sum += f.value();
  }
  rep.mean = sum / static_cast<double>(rep.rows.size());
  return rep;
}

std::uint64_t spmv_flops(const CsrMatrix& a) noexcept { return 2ull * a.nnz(); }

std::uint64_t spmm_flops(const CsrMatrix& a, std::uint64_t k) noexcept { return 2ull * a.nnz() * k; }

SpmvBytes spmv_bytes(const CsrMatrix& a) noexcept {
  const auto m = static_cast<std::uint64_t>(a.rows());
  const auto n = static_cast<std::uint64_t>(a.cols());
  const std::uint64_t tau = a.nnz();
  return {12 * tau, 8 * m + 8 * n + 4 * (m + 1) + 12 * tau};
}

std::uint64_t spmm_bytes(const CsrMatrix& a, std::uint64_t k) {
  if (k < 1) throw MetricError("SpMM needs k >= 1");
  const auto m = static_cast<std::uint64_t>(a.rows());
  const auto n = static_cast<std::uint64_t>(a.cols());
  return 8 * m * k + 8 * n * k + 4 * (m + 1) + 12 * a.nnz();
}

CacheModelConfig CacheModelConfig::infinite(unsigned cores, index_t chunk_rows) {
  CacheModelConfig c;
  c.cores = cores;
  c.chunk_rows = chunk_rows;
  c.cache_capacity_bytes.reset();
  return c;
}

void CacheModelConfig::validate() const {
  if (cores < 1) throw MetricError("cache model needs cores >= 1");
  if (chunk_rows < 1) throw MetricError("cache model needs chunk_rows >= 1");
  if (cacheline_bytes < 8 || cacheline_bytes % 8 != 0)
    throw MetricError("cacheline size must be a positive multiple of 8 bytes");
  if (cache_capacity_bytes) {
    if (*cache_capacity_bytes < cacheline_bytes || *cache_capacity_bytes % cacheline_bytes != 0)
      throw MetricError("cache capacity must be a positive multiple of the cacheline size");
  }
}

namespace {

// Fully associative LRU over a dense id space, as an intrusive list.
class LruCache {
public:
  LruCache(std::uint64_t lines, std::uint64_t capacity)
      : capacity_(capacity), prev_(lines, kNone), next_(lines, kNone), resident_(lines, 0) {}

  /// Returns true on miss.
  bool access(std::uint64_t line) {
    if (resident_[line]) {
      if (head_ != line) {
        unlink(line);
        push_front(line);
      }
      return false;
    }
    if (size_ == capacity_) {
      const std::uint64_t victim = tail_;
      unlink(victim);
      resident_[victim] = 0;
      --size_;
    }
    push_front(line);
    resident_[line] = 1;
    ++size_;
    return true;
  }

  void clear() {
    for (std::uint64_t l = head_; l != kNone;) {
      const std::uint64_t nx = next_[l];
      resident_[l] = 0;
      prev_[l] = next_[l] = kNone;
      l = nx;
    }
    head_ = tail_ = kNone;
    size_ = 0;
  }

private:
  static constexpr std::uint64_t kNone = ~0ull;

  void unlink(std::uint64_t l) {
    if (prev_[l] != kNone) next_[prev_[l]] = next_[l];
    else head_ = next_[l];
    if (next_[l] != kNone) prev_[next_[l]] = prev_[l];
    else tail_ = prev_[l];
    prev_[l] = next_[l] = kNone;
  }
  void push_front(std::uint64_t l) {
    prev_[l] = kNone;
    next_[l] = head_;
    if (head_ != kNone) prev_[head_] = l;
    head_ = l;
    if (tail_ == kNone) tail_ = l;
  }

  std::uint64_t capacity_;
  std::uint64_t size_ = 0;
  std::uint64_t head_ = kNone;
  std::uint64_t tail_ = kNone;
  std::vector<std::uint64_t> prev_;
  std::vector<std::uint64_t> next_;
  std::vector<char> resident_;
};

}  // namespace

CacheModelReport vector_access_model(const CsrMatrix& a, const CacheModelConfig& cfg,
                                     std::uint64_t k) {
  cfg.validate();
  if (k < 1) throw MetricError("cache model needs k >= 1");
  const std::uint64_t line_bytes = cfg.cacheline_bytes;
  const std::uint64_t row_bytes = 8 * k;
  const std::uint64_t vector_bytes = row_bytes * static_cast<std::uint64_t>(a.cols());
  const std::uint64_t total_lines = (vector_bytes + line_bytes - 1) / line_bytes;

  CacheModelReport rep;
  rep.per_core_misses.assign(cfg.cores, 0);

  const index_t chunk = cfg.chunk_rows;
  const index_t nchunks = a.rows() == 0 ? 0 : (a.rows() - 1) / chunk + 1;
  const auto cores = static_cast<index_t>(cfg.cores);

  std::vector<std::uint32_t> stamp(total_lines, 0);   // infinite cache: last core that saw a line
  std::vector<char> touched(total_lines, 0);
  std::optional<LruCache> lru;
  if (cfg.cache_capacity_bytes) lru.emplace(total_lines, *cfg.cache_capacity_bytes / line_bytes);

  for (index_t core = 0; core < cores; ++core) {
    std::uint64_t misses = 0;
    const auto mark = static_cast<std::uint32_t>(core) + 1;
    auto touch = [&](std::uint64_t line) {
      touched[line] = 1;
      if (lru) {
        misses += lru->access(line) ? 1 : 0;
      } else if (stamp[line] != mark) {
        stamp[line] = mark;
        ++misses;
      }
    };
    for (index_t c = core; c < nchunks; c += cores) {
      const index_t r0 = c * chunk;
      const index_t r1 = std::min(a.rows(), r0 + chunk);
      for (index_t i = r0; i < r1; ++i)
        for (index_t col : a.row_cids(i)) {
          const std::uint64_t first = static_cast<std::uint64_t>(col) * row_bytes;
          const std::uint64_t last = first + row_bytes - 1;
          for (std::uint64_t l = first / line_bytes; l <= last / line_bytes; ++l) touch(l);
        }
    }
    if (lru) lru->clear();
    rep.per_core_misses[core] = misses;
    rep.total_misses += misses;
  }
  for (char t : touched) rep.distinct_lines += t ? 1 : 0;
  rep.total_vector_bytes = rep.total_misses * line_bytes;
  rep.vector_access_ratio =
      vector_bytes == 0 ? 0.0 : static_cast<double>(rep.total_vector_bytes) / static_cast<double>(vector_bytes);
  rep.touched_fraction =
      total_lines == 0 ? 0.0 : static_cast<double>(rep.distinct_lines) / static_cast<double>(total_lines);
  return rep;
}

BandwidthModel bandwidth_model(const CsrMatrix& a, std::uint64_t k,
                               const CacheModelReport& vector_model) {
  BandwidthModel bw;
  const auto n = static_cast<std::uint64_t>(a.cols());
  bw.naive_bytes = 12ull * a.nnz();
  std::uint64_t input_term;
  if (k == 0) {
    bw.application_bytes = spmv_bytes(a).application;
    input_term = 8 * n;
  } else {
    bw.application_bytes = spmm_bytes(a, k);
    input_term = 8 * n * k;
  }
  bw.estimated_actual_bytes = bw.application_bytes - input_term + vector_model.total_vector_bytes;
  return bw;
}

double effective_bandwidth(std::uint64_t bytes, double seconds) {
  if (!(seconds > 0.0)) throw MetricError("elapsed time must be positive");
  return static_cast<double>(bytes) / seconds / 1e9;
}

double gflops(std::uint64_t flops, double seconds) {
  if (!(seconds > 0.0)) throw MetricError("elapsed time must be positive");
  return static_cast<double>(flops) / seconds / 1e9;
}

std::uint64_t break_even_nnz(BlockDims d) noexcept { return block_cost_bytes(d) / 12 + 1; }

BlockDensity block_density_analysis(const CsrMatrix& a, BlockDims dims) {
  validate_block_dims(dims);
  BlockDensity r;
  r.dims = dims;
  r.blocks = count_blocks(a, dims);
  const auto slots = static_cast<std::uint64_t>(dims.rows) * static_cast<std::uint64_t>(dims.cols);
  r.fill_ratio = r.blocks == 0 ? 0.0
                               : static_cast<double>(a.nnz()) / static_cast<double>(r.blocks * slots);
  r.break_even_nnz = break_even_nnz(dims);
  r.break_even_density = static_cast<double>(r.break_even_nnz) / static_cast<double>(slots);
  const auto block_rows = static_cast<std::size_t>((a.rows() + dims.rows - 1) / dims.rows);
  r.blocked_bytes = blocked_footprint_bytes(r.blocks, block_rows, dims);
  r.csr_bytes = csr_footprint_bytes(a);
  r.saves_memory = r.blocked_bytes < r.csr_bytes;
  return r;
}

}  // namespace sparsebench
