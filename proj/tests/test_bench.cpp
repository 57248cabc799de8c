#include <chrono>
#include <cmath>
#include <thread>

#include "doctest.h"
#include "sparsebench/bench.hpp"

using namespace sparsebench;

namespace {

// Virtual clock: the kernel advances it by 1 ms, the flush by 7 ms.
struct FakeHost {
  double t = 0.0;
  int kernel_calls = 0;
  int flush_calls = 0;
  std::vector<int> flush_before_kernel;  // kernel_calls seen at each flush

  TimingHooks hooks() {
    return {[this] { return t; }, [this] {
              flush_before_kernel.push_back(kernel_calls);
              ++flush_calls;
              t += 7e-3;
            }};
  }
  std::function<void()> kernel() {
    return [this] {
      ++kernel_calls;
      t += 1e-3;
    };
  }
};

}  // namespace

TEST_CASE("protocol keeps the last 60 of 70 runs and excludes the flush") {
  FakeHost host;
  const TimingStats st = time_kernel(host.kernel(), BenchProtocol{}, host.hooks());
  CHECK(st.samples.size() == 60);
  CHECK(host.kernel_calls == 70);
  CHECK(host.flush_calls == 70);
  for (int i = 0; i < 70; ++i) CHECK(host.flush_before_kernel[static_cast<std::size_t>(i)] == i);
  for (double s : st.samples) CHECK(s == doctest::Approx(1e-3).epsilon(1e-9));
  CHECK(st.mean == doctest::Approx(1e-3).epsilon(1e-9));
  CHECK(st.stddev == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("protocol variants") {
  SUBCASE("single run has zero spread") {
    FakeHost host;
    const TimingStats st = time_kernel(host.kernel(), {1, 0, true, 0}, host.hooks());
    CHECK(st.samples.size() == 1);
    CHECK(st.stddev == 0.0);
    CHECK(st.min == st.max);
  }
  SUBCASE("no flush requested") {
    FakeHost host;
    time_kernel(host.kernel(), {5, 1, false, 0}, host.hooks());
    CHECK(host.flush_calls == 0);
  }
  SUBCASE("invalid protocols") {
    FakeHost host;
    CHECK_THROWS_AS(time_kernel(host.kernel(), {10, 10, false, 0}, host.hooks()), BenchError);
    CHECK_THROWS_AS(time_kernel(host.kernel(), {0, 0, false, 0}, host.hooks()), BenchError);
  }
  SUBCASE("kernel failure names the run") {
    int calls = 0;
    try {
      time_kernel([&] {
        if (++calls == 4) throw DimensionError("bad operand");
      },
                  {10, 2, false, 0});
      FAIL("expected BenchError");
    } catch (const BenchError& e) {
      CHECK(std::string(e.what()) == "run 3: bad operand");
    }
  }
}

TEST_CASE("summarize uses the population standard deviation") {
  const TimingStats st = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(st.mean == 2.5);
  CHECK(st.min == 1.0);
  CHECK(st.max == 4.0);
  CHECK(st.stddev == doctest::Approx(std::sqrt(1.25)));
}

TEST_CASE("real clock around a 1 ms busy wait") {
  CHECK(timer_resolution_seconds() > 0.0);
  CHECK(timer_resolution_seconds() <= 1e-6);
  auto busy = [] {
    const double t0 = steady_seconds();
    while (steady_seconds() - t0 < 1e-3) {
    }
  };
  const TimingStats st = time_kernel(busy, {20, 5, true, 1 << 16});
  CHECK(st.samples.size() == 15);
  CHECK(st.min >= 1e-3);
  // Loose upper bound: a shared host can preempt us.
  CHECK(st.mean < 5e-3);
}

TEST_CASE("cache flusher and host queries") {
  CHECK(last_level_cache_bytes() > 0);
  CacheFlusher f(1 << 16);
  CHECK(f.bytes() == 1 << 16);
  f();
}

TEST_CASE("read microbenchmark checksums") {
  const auto r32 = microbench_read_sum(1 << 20, 1, ElementWidth::k32);
  CHECK(r32.checksum == 262144);  // 1 MiB of 32-bit ones
  CHECK(microbench_read_sum(1 << 20, 1, ElementWidth::k8).checksum == (1u << 20));
  CHECK(microbench_read_sum(1 << 20, 1, ElementWidth::kWide).checksum == (1u << 20) / 8);
  const auto r2 = microbench_read_sum(1 << 20, 2, ElementWidth::k32, 3);
  CHECK(r2.checksum == 2 * 262144);
  CHECK(r2.passes == 3);
  CHECK(r2.workers == 2);
  CHECK(r2.gbps > 0.0);
  CHECK(r2.gbps == doctest::Approx(2.0 * (1 << 20) * 3 / r2.seconds / 1e9));
  CHECK_THROWS_AS(microbench_read_sum(1 << 20, 0, ElementWidth::k32), BenchError);
  CHECK_THROWS_AS(microbench_read_sum(8, 1, ElementWidth::k32), BenchError);
  CHECK(parse_element_width("wide") == ElementWidth::kWide);
  CHECK(to_string(ElementWidth::k8) == "8bit");
  CHECK_THROWS_AS(parse_element_width("16bit"), BenchError);
}

TEST_CASE("write microbenchmark verifies the fill") {
  const auto w = microbench_write_fill(1 << 20, 2, 2, 0x3c);
  CHECK(w.checksum == 2u * (1 << 20));
  CHECK(w.gbps > 0.0);
}

TEST_CASE("sweep") {
  const CsrMatrix a = gen_stencil5(24);
  SweepOptions opt;
  opt.protocol = {3, 1, false, 0};
  // Each kernel call takes a fake duration that depends on the call count,
  // so the ranking is known in advance.
  double t = 0.0;
  int call = 0;
  std::vector<double> cost{4e-3, 1e-3, 2e-3, 3e-3};
  opt.hooks.flush = [] {};
  // The now() hook runs twice per kernel call; advance on the second read.
  int reads = 0;
  opt.hooks.now = [&] {
    if (reads++ % 2 == 1) t += cost[static_cast<std::size_t>(call++ / 3) % cost.size()];
    return t;
  };
  opt.cache_model = CacheModelConfig::infinite();

  SweepGrid grid;
  grid.threads = {1, 2};
  grid.policies = {Policy::kDynamic};
  grid.chunks = {32, 64};
  const auto pts = sweep(a, "stencil:24", KernelFamily::kSpmv, grid, opt);
  REQUIRE(pts.size() == 4);
  CHECK(pts[0].best);
  CHECK_FALSE(pts[1].best);
  for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i - 1].result->gflops >= pts[i].result->gflops);
  // Second grid point (threads 1, chunk 64) got cost 1 ms.
  CHECK(pts[0].config.schedule.threads == 1);
  CHECK(pts[0].config.schedule.chunk == 64);
  for (const auto& p : pts) {
    const BenchResult& r = *p.result;
    CHECK(r.flops == 2 * a.nnz());
    CHECK(r.gflops == doctest::Approx(2.0 * static_cast<double>(a.nnz()) / r.timing.mean / 1e9));
    CHECK(r.application_gbps == doctest::Approx(static_cast<double>(r.bytes.application_bytes) / r.timing.mean / 1e9));
    CHECK(r.naive_gbps == doctest::Approx(12.0 * static_cast<double>(a.nnz()) / r.timing.mean / 1e9));
    CHECK(r.estimated_gbps ==
          doctest::Approx(static_cast<double>(r.bytes.estimated_actual_bytes) / r.timing.mean / 1e9));
    CHECK(r.timing.samples.size() == 2);
  }
}

TEST_CASE("sweep records failures last and handles single points") {
  const CsrMatrix a = gen_stencil5(8);
  SweepOptions opt;
  opt.protocol = {2, 0, false, 0};
  opt.cache_model = CacheModelConfig::infinite();
  SweepGrid grid;
  grid.threads = {0, 1};  // zero threads fails schedule validation
  grid.policies = {Policy::kStatic};
  grid.chunks = {16};
  const auto pts = sweep(a, "s8", KernelFamily::kSpmv, grid, opt);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].result.has_value());
  CHECK(pts[0].best);
  CHECK_FALSE(pts[1].result.has_value());
  CHECK(pts[1].error.find("run 0") != std::string::npos);

  SweepGrid one;
  one.policies = {Policy::kDynamic};
  one.chunks = {8};
  one.ks = {8};
  const auto mm = sweep(a, "s8", KernelFamily::kSpmm, one, opt);
  REQUIRE(mm.size() == 1);
  CHECK(mm[0].best);
  CHECK(mm[0].result->flops == 2 * a.nnz() * 8);

  SweepGrid blocks;
  blocks.policies = {Policy::kDynamic};
  blocks.chunks = {4};
  blocks.blocks = {{8, 1}, {1, 8}};
  CHECK(sweep(a, "s8", KernelFamily::kBlocked, blocks, opt).size() == 2);

  SweepGrid empty;
  empty.threads = {};
  CHECK_THROWS_AS(sweep(a, "s8", KernelFamily::kSpmv, empty, opt), BenchError);
}
