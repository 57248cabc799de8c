#pragma once

// Measurement protocol (repeat, discard warm-up runs, flush caches between
// runs), host bandwidth microbenchmarks and parameter sweeps.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sparsebench/analysis.hpp"
#include "sparsebench/kernels.hpp"
#include "sparsebench/matrix.hpp"
#include "sparsebench/schedule.hpp"

namespace sparsebench {

struct BenchProtocol {
  unsigned total_runs = 70;
  unsigned discard_runs = 10;
  bool flush_between = true;
  std::size_t flush_buffer_bytes = 0;  // 0 = 4 x last-level cache

  void validate() const;
};

/// Clock and flush callbacks; empty members fall back to the steady clock
/// and a scratch-buffer sweep. Tests inject fakes here.
struct TimingHooks {
  std::function<double()> now;    // seconds, monotonic
  std::function<void()> flush;
};

struct TimingStats {
  std::vector<double> samples;  // kept runs only, in run order
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double stddev = 0.0;          // population
};

TimingStats summarize(std::vector<double> samples);

/// Runs `kernel` total_runs times and keeps the last total_runs - discard_runs
/// timings. Flushing happens outside the timed region. An exception from the
/// kernel is rethrown as BenchError naming the run index.
TimingStats time_kernel(const std::function<void()>& kernel, const BenchProtocol& protocol,
                        const TimingHooks& hooks = {});

double steady_seconds();
/// Smallest observable nonzero tick of steady_seconds().
double timer_resolution_seconds();

/// Last-level cache size from sysconf/sysfs, 32 MiB when unknown.
std::size_t last_level_cache_bytes();

/// Read+write sweep over a private scratch buffer.
class CacheFlusher {
public:
  explicit CacheFlusher(std::size_t bytes);
  void operator()();
  std::size_t bytes() const noexcept { return buffer_.size(); }

private:
  std::vector<unsigned char> buffer_;
};

enum class KernelFamily { kSpmv, kSpmm, kBlocked };

std::string to_string(KernelFamily f);

struct KernelConfig {
  std::string matrix;
  KernelFamily family = KernelFamily::kSpmv;
  Schedule schedule;
  std::uint64_t k = 1;                 // dense columns; 1 for SpMV
  std::optional<BlockDims> blocks;     // kBlocked only
};

struct BenchResult {
  KernelConfig config;
  TimingStats timing;
  std::uint64_t flops = 0;
  BandwidthModel bytes;
  double gflops = 0.0;
  double naive_gbps = 0.0;
  double application_gbps = 0.0;
  double estimated_gbps = 0.0;
};

/// Derives every rate from timing.mean through the analysis formulas.
BenchResult make_result(const KernelConfig& config, const TimingStats& timing, const CsrMatrix& a,
                        const CacheModelReport& vector_model);

enum class ElementWidth { k8, k32, kWide };

std::string to_string(ElementWidth w);
ElementWidth parse_element_width(std::string_view s);

inline constexpr std::size_t kDefaultMicrobenchBytes = 16u << 20;

struct MicrobenchResult {
  unsigned workers = 0;
  std::size_t bytes_per_worker = 0;
  unsigned passes = 0;
  double seconds = 0.0;
  double gbps = 0.0;
  std::uint64_t checksum = 0;  // read: sum of one pass over every worker's buffer
};

/// Every worker sums its own buffer of ones (first-touched by that worker).
/// Bandwidth counts workers * bytes * passes over the wall time.
MicrobenchResult microbench_read_sum(std::size_t bytes_per_worker, unsigned workers,
                                     ElementWidth width, unsigned passes = 1);

/// Every worker fills its own buffer with `value`; buffers are verified
/// afterwards and a mismatch throws BenchError.
MicrobenchResult microbench_write_fill(std::size_t bytes_per_worker, unsigned workers,
                                       unsigned passes = 1, unsigned char value = 0x5a);

struct SweepGrid {
  std::vector<unsigned> threads{1};
  std::vector<Policy> policies{Policy::kDynamic, Policy::kStatic};
  std::vector<index_t> chunks{32, 64};
  std::vector<std::uint64_t> ks{16};           // kSpmm only
  std::vector<BlockDims> blocks{{8, 1}};       // kBlocked only
};

struct SweepPoint {
  KernelConfig config;
  std::optional<BenchResult> result;
  std::string error;
  bool best = false;
};

struct SweepOptions {
  BenchProtocol protocol;
  TimingHooks hooks;
  CacheModelConfig cache_model;  // cores and chunk_rows follow each point
};

/// One point per grid combination, sorted stably by GFlop/s descending with
/// failed points last. The fastest point has best = true.
std::vector<SweepPoint> sweep(const CsrMatrix& a, const std::string& matrix_id, KernelFamily family,
                              const SweepGrid& grid, const SweepOptions& options);

}  // namespace sparsebench
