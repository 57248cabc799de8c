#include "sparsebench/bench.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <barrier>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <thread>
#include <tuple>

namespace sparsebench {

void BenchProtocol::validate() const {
  if (total_runs < 1) throw BenchError("protocol needs at least one run");
  if (discard_runs >= total_runs)
    throw BenchError("discard_runs (" + std::to_string(discard_runs) + ") must be below total_runs (" +
                     std::to_string(total_runs) + ")");
}

double steady_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

double timer_resolution_seconds() {
  double best = 1.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double t0 = steady_seconds();
    double t1 = steady_seconds();
    while (t1 == t0) t1 = steady_seconds();
    best = std::min(best, t1 - t0);
  }
  return best;
}

std::size_t last_level_cache_bytes() {
#ifdef _SC_LEVEL3_CACHE_SIZE
  if (long v = ::sysconf(_SC_LEVEL3_CACHE_SIZE); v > 0) return static_cast<std::size_t>(v);
  if (long v = ::sysconf(_SC_LEVEL2_CACHE_SIZE); v > 0) return static_cast<std::size_t>(v);
#endif
  for (int idx = 4; idx >= 0; --idx) {
    std::ifstream in("/sys/devices/system/cpu/cpu0/cache/index" + std::to_string(idx) + "/size");
    std::string s;
    if (in >> s && !s.empty()) {
      std::size_t mult = 1;
      if (s.back() == 'K') mult = 1024;
      else if (s.back() == 'M') mult = 1024 * 1024;
      if (mult != 1) s.pop_back();
      try {
        return std::stoull(s) * mult;
      } catch (...) {
      }
    }
  }
  return 32u << 20;
}

CacheFlusher::CacheFlusher(std::size_t bytes) : buffer_(std::max<std::size_t>(bytes, 64), 0) {}

void CacheFlusher::operator()() {
  // Touch every line for read and write.
  unsigned char* p = buffer_.data();
  const std::size_t n = buffer_.size();
  for (std::size_t i = 0; i < n; i += 64) p[i] = static_cast<unsigned char>(p[i] + 1);
  asm volatile("" : : "r"(p) : "memory");
}

TimingStats summarize(std::vector<double> samples) {
  TimingStats st;
  st.samples = std::move(samples);
  if (st.samples.empty()) return st;
  const double n = static_cast<double>(st.samples.size());
  st.mean = std::accumulate(st.samples.begin(), st.samples.end(), 0.0) / n;
  auto [lo, hi] = std::minmax_element(st.samples.begin(), st.samples.end());
  st.min = *lo;
  st.max = *hi;
  double var = 0.0;
  for (double s : st.samples) var += (s - st.mean) * (s - st.mean);
  st.stddev = std::sqrt(var / n);
  return st;
}

TimingStats time_kernel(const std::function<void()>& kernel, const BenchProtocol& protocol,
                        const TimingHooks& hooks) {
  protocol.validate();
  std::function<double()> now = hooks.now ? hooks.now : std::function<double()>(&steady_seconds);
  std::function<void()> flush = hooks.flush;
  std::optional<CacheFlusher> flusher;
  if (protocol.flush_between && !flush) {
    const std::size_t bytes =
        protocol.flush_buffer_bytes ? protocol.flush_buffer_bytes : 4 * last_level_cache_bytes();
    flusher.emplace(bytes);
    flush = [&flusher] { (*flusher)(); };
  }

  std::vector<double> kept;
  kept.reserve(protocol.total_runs - protocol.discard_runs);
  for (unsigned run = 0; run < protocol.total_runs; ++run) {
    if (protocol.flush_between) flush();
    const double t0 = now();
    try {
      kernel();
    } catch (const std::exception& e) {
      throw BenchError("run " + std::to_string(run) + ": " + e.what());
    }
    const double t1 = now();
    if (run >= protocol.discard_runs) kept.push_back(t1 - t0);
  }
  return summarize(std::move(kept));
}

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::kSpmv: return "spmv";
    case KernelFamily::kSpmm: return "spmm";
    case KernelFamily::kBlocked: return "spmv-blocked";
  }
  return "?";
}

BenchResult make_result(const KernelConfig& config, const TimingStats& timing, const CsrMatrix& a,
                        const CacheModelReport& vector_model) {
  BenchResult r;
  r.config = config;
  r.timing = timing;
  const bool is_spmm = config.family == KernelFamily::kSpmm;
  r.flops = is_spmm ? spmm_flops(a, config.k) : spmv_flops(a);
  r.bytes = bandwidth_model(a, is_spmm ? config.k : 0, vector_model);
  r.gflops = gflops(r.flops, timing.mean);
  r.naive_gbps = effective_bandwidth(r.bytes.naive_bytes, timing.mean);
  r.application_gbps = effective_bandwidth(r.bytes.application_bytes, timing.mean);
  r.estimated_gbps = effective_bandwidth(r.bytes.estimated_actual_bytes, timing.mean);
  return r;
}

std::string to_string(ElementWidth w) {
  switch (w) {
    case ElementWidth::k8: return "8bit";
    case ElementWidth::k32: return "32bit";
    case ElementWidth::kWide: return "wide";
  }
  return "?";
}

ElementWidth parse_element_width(std::string_view s) {
  if (s == "8bit" || s == "8") return ElementWidth::k8;
  if (s == "32bit" || s == "32") return ElementWidth::k32;
  if (s == "wide" || s == "512") return ElementWidth::kWide;
  throw BenchError("unknown element width '" + std::string(s) + "'");
}

namespace {

std::size_t usable_bytes(std::size_t bytes) {
  const std::size_t b = bytes / 64 * 64;
  if (b == 0) throw BenchError("microbenchmark buffer must be at least 64 bytes");
  return b;
}

std::uint64_t sum_u8(const unsigned char* p, std::size_t n) {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < n; ++i) s += p[i];
  return s;
}

std::uint64_t sum_u32(const std::uint32_t* p, std::size_t n) {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < n; ++i) s += p[i];
  return s;
}

// 64-byte packs with eight independent lanes, read from eight segments of
// the buffer in lockstep. A single sequential stream is bounded by the
// per-stream prefetcher well below what one core can pull from memory.
constexpr std::size_t kWideStreams = 8;

std::uint64_t sum_wide(const std::uint64_t* p, std::size_t n) {
  std::array<std::uint64_t, 8 * kWideStreams> acc{};
  const std::size_t seg = n / kWideStreams / 8 * 8;
  for (std::size_t i = 0; i < seg; i += 8)
    for (std::size_t s = 0; s < kWideStreams; ++s)
      for (std::size_t l = 0; l < 8; ++l) acc[s * 8 + l] += p[s * seg + i + l];
  std::uint64_t tail = 0;
  for (std::size_t i = seg * kWideStreams; i < n; ++i) tail += p[i];
  return std::accumulate(acc.begin(), acc.end(), tail);
}

template <class Prepare, class Work>
MicrobenchResult run_workers(std::size_t bytes, unsigned workers, unsigned passes, Prepare prepare,
                             Work work) {
  if (workers < 1) throw BenchError("microbenchmark needs at least one worker");
  if (passes < 1) throw BenchError("microbenchmark needs at least one pass");
  std::vector<std::vector<std::uint64_t>> buffers(workers);
  std::vector<std::uint64_t> sums(workers, 0);
  std::vector<std::exception_ptr> errors(workers);
  double t_start = 0.0;
  double t_end = 0.0;
  std::barrier ready(static_cast<std::ptrdiff_t>(workers), [&]() noexcept { t_start = steady_seconds(); });
  std::barrier done(static_cast<std::ptrdiff_t>(workers), [&]() noexcept { t_end = steady_seconds(); });

  auto body = [&](unsigned id) {
    try {
      buffers[id].resize(bytes / 8);
      prepare(buffers[id]);
    } catch (...) {
      errors[id] = std::current_exception();
    }
    ready.arrive_and_wait();
    if (!errors[id]) {
      for (unsigned pass = 0; pass < passes; ++pass) {
        sums[id] = work(buffers[id]);
        asm volatile("" : : "r"(buffers[id].data()) : "memory");
      }
    }
    done.arrive_and_wait();
  };
  std::vector<std::thread> threads;
  threads.reserve(workers - 1);
  for (unsigned id = 1; id < workers; ++id) threads.emplace_back(body, id);
  body(0);
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) {
      try {
        std::rethrow_exception(e);
      } catch (const std::bad_alloc&) {
        throw BenchError("cannot allocate " + std::to_string(bytes) + " bytes per worker");
      }
    }

  MicrobenchResult r;
  r.workers = workers;
  r.bytes_per_worker = bytes;
  r.passes = passes;
  r.seconds = t_end - t_start;
  r.checksum = std::accumulate(sums.begin(), sums.end(), std::uint64_t{0});
  const double total = static_cast<double>(bytes) * workers * passes;
  r.gbps = r.seconds > 0 ? total / r.seconds / 1e9 : 0.0;
  return r;
}

}  // namespace

MicrobenchResult microbench_read_sum(std::size_t bytes_per_worker, unsigned workers,
                                     ElementWidth width, unsigned passes) {
  const std::size_t bytes = usable_bytes(bytes_per_worker);
  auto prepare = [width](std::vector<std::uint64_t>& buf) {
    void* raw = buf.data();
    switch (width) {
      case ElementWidth::k8: std::memset(raw, 1, buf.size() * 8); break;
      case ElementWidth::k32: {
        auto* p = static_cast<std::uint32_t*>(raw);
        std::fill(p, p + buf.size() * 2, 1u);
        break;
      }
      case ElementWidth::kWide: std::fill(buf.begin(), buf.end(), 1ull); break;
    }
  };
  auto work = [width](const std::vector<std::uint64_t>& buf) -> std::uint64_t {
    const void* raw = buf.data();
    switch (width) {
      case ElementWidth::k8: return sum_u8(static_cast<const unsigned char*>(raw), buf.size() * 8);
      case ElementWidth::k32: return sum_u32(static_cast<const std::uint32_t*>(raw), buf.size() * 2);
      case ElementWidth::kWide: return sum_wide(buf.data(), buf.size());
    }
    return 0;
  };
  return run_workers(bytes, workers, passes, prepare, work);
}

MicrobenchResult microbench_write_fill(std::size_t bytes_per_worker, unsigned workers,
                                       unsigned passes, unsigned char value) {
  const std::size_t bytes = usable_bytes(bytes_per_worker);
  // Prefault with a different byte so the timed fill is a real change.
  const auto other = static_cast<unsigned char>(~value);
  auto prepare = [other](std::vector<std::uint64_t>& buf) { std::memset(buf.data(), other, buf.size() * 8); };
  auto work = [value](std::vector<std::uint64_t>& buf) -> std::uint64_t {
    std::memset(buf.data(), value, buf.size() * 8);
    asm volatile("" : : "r"(buf.data()) : "memory");
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
    const std::size_t n = buf.size() * 8;
    return static_cast<std::uint64_t>(std::count(p, p + n, value));
  };
  // The verifying pass is not timed; bandwidth comes from a second, fill-only run.
  MicrobenchResult checked = run_workers(bytes, workers, 1, prepare, work);
  if (checked.checksum != static_cast<std::uint64_t>(bytes) * workers)
    throw BenchError("write verification failed: " + std::to_string(checked.checksum) + " of " +
                     std::to_string(bytes * workers) + " bytes hold the fill value");
  auto fill_only = [value](std::vector<std::uint64_t>& buf) -> std::uint64_t {
    std::memset(buf.data(), value, buf.size() * 8);
    asm volatile("" : : "r"(buf.data()) : "memory");
    return buf.empty() ? 0 : static_cast<std::uint64_t>(reinterpret_cast<const unsigned char*>(buf.data())[0]);
  };
  MicrobenchResult timed = run_workers(bytes, workers, passes, prepare, fill_only);
  timed.checksum = checked.checksum;
  return timed;
}

std::vector<SweepPoint> sweep(const CsrMatrix& a, const std::string& matrix_id, KernelFamily family,
                              const SweepGrid& grid, const SweepOptions& options) {
  std::vector<KernelConfig> configs;
  const std::vector<std::uint64_t> ks = family == KernelFamily::kSpmm ? grid.ks : std::vector<std::uint64_t>{1};
  const std::vector<std::optional<BlockDims>> blocks = [&] {
    std::vector<std::optional<BlockDims>> out;
    if (family == KernelFamily::kBlocked) out.assign(grid.blocks.begin(), grid.blocks.end());
    else out.emplace_back(std::nullopt);
    return out;
  }();
  for (const auto& b : blocks)
    for (std::uint64_t k : ks)
      for (unsigned t : grid.threads)
        for (Policy p : grid.policies)
          for (index_t c : grid.chunks) {
            KernelConfig cfg;
            cfg.matrix = matrix_id;
            cfg.family = family;
            cfg.schedule = {p, c, t};
            cfg.k = k;
            cfg.blocks = b;
            configs.push_back(cfg);
          }
  if (configs.empty()) throw BenchError("sweep grid is empty");

  // Deterministic operands shared by all points.
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(a.cols()));
  for (double& v : x) v = dist(rng);
  std::vector<double> y(static_cast<std::size_t>(a.rows()));
  std::map<std::uint64_t, DenseMatrix> dense_in;
  std::map<std::tuple<unsigned, index_t, std::uint64_t>, CacheModelReport> models;
  std::map<std::pair<index_t, index_t>, BlockedMatrix> blocked;

  std::vector<SweepPoint> points;
  points.reserve(configs.size());
  for (const auto& cfg : configs) {
    SweepPoint pt;
    pt.config = cfg;
    try {
      std::function<void()> kernel;
      DenseMatrix* xin = nullptr;
      DenseMatrix yout;
      if (family == KernelFamily::kSpmm) {
        auto it = dense_in.find(cfg.k);
        if (it == dense_in.end()) {
          DenseMatrix X(static_cast<std::size_t>(a.cols()), cfg.k);
          for (double& v : X.data()) v = dist(rng);
          it = dense_in.emplace(cfg.k, std::move(X)).first;
        }
        xin = &it->second;
        yout = DenseMatrix(static_cast<std::size_t>(a.rows()), cfg.k);
        kernel = [&, xin] { spmm(a, *xin, yout, cfg.schedule); };
      } else if (family == KernelFamily::kBlocked) {
        const BlockDims d = *cfg.blocks;
        auto key = std::make_pair(d.rows, d.cols);
        auto it = blocked.find(key);
        if (it == blocked.end()) it = blocked.emplace(key, to_blocked(a, d)).first;
        const BlockedMatrix& bm = it->second;
        kernel = [&] { spmv_blocked(bm, x, y, cfg.schedule); };
      } else {
        kernel = [&] { spmv_parallel(a, x, y, cfg.schedule); };
      }
      const TimingStats timing = time_kernel(kernel, options.protocol, options.hooks);

      const std::uint64_t model_k = family == KernelFamily::kSpmm ? cfg.k : 1;
      auto mkey = std::make_tuple(cfg.schedule.threads, cfg.schedule.chunk, model_k);
      auto mit = models.find(mkey);
      if (mit == models.end()) {
        CacheModelConfig mc = options.cache_model;
        mc.cores = cfg.schedule.threads;
        mc.chunk_rows = cfg.schedule.chunk;
        mit = models.emplace(mkey, vector_access_model(a, mc, model_k)).first;
      }
      pt.result = make_result(cfg, timing, a, mit->second);
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
    points.push_back(std::move(pt));
  }
  std::stable_sort(points.begin(), points.end(), [](const SweepPoint& l, const SweepPoint& r) {
    if (l.result.has_value() != r.result.has_value()) return l.result.has_value();
    if (!l.result) return false;
    return l.result->gflops > r.result->gflops;
  });
  if (!points.empty() && points.front().result) points.front().best = true;
  return points;
}

}  // namespace sparsebench
