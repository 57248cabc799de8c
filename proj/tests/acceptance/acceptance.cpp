// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Every check runs against an independent oracle or a
// pinned constant; nothing here reuses the code path it is checking.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "oracles.hpp"
#include "sparsebench/analysis.hpp"
#include "sparsebench/bench.hpp"
#include "sparsebench/kernels.hpp"
#include "sparsebench/ordering.hpp"

using namespace sparsebench;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body,
            double time_limit_s = 0.0) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (time_limit_s > 0.0 && secs >= time_limit_s) {
    o.pass = false;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("runtime over limit");
  }
  char timing[64];
  if (time_limit_s > 0.0) std::snprintf(timing, sizeof timing, "%.2fs, limit %.0fs", secs, time_limit_s);
  else std::snprintf(timing, sizeof timing, "%.2fs", secs);
  std::printf("%s criterion %d: %s (%s)%s%s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), timing,
              o.detail.empty() ? "" : " -- ", o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& e : v) e = u(rng);
  return v;
}

// The 500-matrix random suite shared by criteria 1 and 10.
struct Instance {
  CooEntries coo;
  CsrMatrix a;
};

std::vector<Instance> random_suite() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<index_t> dim(1, 64);
  std::uniform_real_distribution<double> density(0.01, 0.5);
  std::vector<Instance> suite;
  suite.reserve(500);
  for (int i = 0; i < 500; ++i) {
    const index_t m = dim(rng);
    const index_t n = dim(rng);
    CooEntries coo = oracle::random_coo(rng, m, n, density(rng));
    CsrMatrix a = csr_from_coo(coo);
    suite.push_back({std::move(coo), std::move(a)});
  }
  return suite;
}

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

int main() {
  const std::vector<Instance> suite = random_suite();

  report(1, "kernel correctness on 500 random matrices", [&] {
    Outcome o;
    std::mt19937_64 rng(1);
    const std::vector<std::size_t> ks{1, 3, 8, 16};
    double worst_blocked = 0.0;
    for (std::size_t idx = 0; idx < suite.size(); ++idx) {
      const auto& [coo, a] = suite[idx];
      const DenseMatrix dense = oracle::assemble(coo);
      const auto x = random_vector(rng, static_cast<std::size_t>(a.cols()));
      const auto ref = oracle::matvec(dense, x);
      const auto ys = spmv_serial(a, x);
      o.require(ys == ref, "spmv_serial differs from the dense oracle on instance " + std::to_string(idx));
      for (unsigned t : {1u, 2u, 4u, 8u})
        for (index_t c : {1, 32, 64})
          for (Policy p : {Policy::kStatic, Policy::kDynamic})
            o.require(spmv_parallel(a, x, {p, c, t}) == ys,
                      "spmv_parallel not bitwise equal on instance " + std::to_string(idx));
      const std::size_t k = ks[idx % ks.size()];
      const DenseMatrix X(static_cast<std::size_t>(a.cols()), k, random_vector(rng, static_cast<std::size_t>(a.cols()) * k));
      o.require(spmm(a, X, {Policy::kDynamic, 8, 4}) == oracle::gemm(dense, X),
                "spmm differs from the GEMM oracle on instance " + std::to_string(idx));
      for (BlockDims d : supported_block_dims()) {
        const auto yb = spmv_blocked(to_blocked(a, d), x, {Policy::kStatic, 2, 2});
        for (index_t i = 0; i < a.rows(); ++i) {
          double scale = 0.0;
          for (std::size_t p = 0; p < a.row_cids(i).size(); ++p)
            scale += std::abs(a.row_values(i)[p] * x[a.row_cids(i)[p]]);
          const double diff = std::abs(yb[i] - ys[i]);
          const double rel = scale == 0.0 ? (diff == 0.0 ? 0.0 : INFINITY) : diff / scale;
          worst_blocked = std::max(worst_blocked, rel);
        }
      }
    }
    o.require(worst_blocked <= 1e-10, "blocked relative error " + fmt("%.3e", worst_blocked));
    if (o.pass) o.detail = "max blocked relative error " + fmt("%.3e", worst_blocked);
    return o;
  }, 30.0);

  report(2, "stencil golden values for side 2048", [] {
    Outcome o;
    const CsrMatrix a = gen_stencil5(2048);
    const MatrixStats st = compute_stats(a);
    o.require(st.rows == 4194304, "rows " + std::to_string(st.rows));
    o.require(st.nonzeros == 20963328, "nonzeros " + std::to_string(st.nonzeros));
    o.require(format_density(st.density) == "1.19e-06", "density " + format_density(st.density));
    o.require(format_avg(st.avg_nnz_per_row) == "4.99", "avg " + format_avg(st.avg_nnz_per_row));
    o.require(st.max_nnz_per_row == 5 && st.max_nnz_per_col == 5, "max nnz per row/col");
    if (o.pass) o.detail = "4194304 rows, 20963328 nnz, density 1.19e-06, avg 4.99";
    return o;
  }, 10.0);

  report(3, "UCLD worked values in exact rational arithmetic", [] {
    Outcome o;
    auto row = [](index_t n, std::vector<index_t> cols) {
      CooEntries coo{1, n, {}};
      for (index_t c : cols) coo.entries.push_back({0, c, 1.0});
      return ucld(csr_from_coo(coo)).rows.at(0).density;
    };
    const Fraction a = row(24, {0, 19, 20});
    const Fraction b = row(8, {0, 1, 2, 3, 4, 5, 6, 7});
    const Fraction c = row(8, {5});
    o.require(a == Fraction{3, 16}, "{0,19,20} gave " + std::to_string(a.num) + "/" + std::to_string(a.den));
    o.require(b == Fraction{1, 1}, "{0..7} gave " + std::to_string(b.num) + "/" + std::to_string(b.den));
    o.require(c == Fraction{1, 8}, "{5} gave " + std::to_string(c.num) + "/" + std::to_string(c.den));
    if (o.pass) o.detail = "3/16, 1/1, 1/8";
    return o;
  });

  report(4, "register-blocking footprint arithmetic", [] {
    Outcome o;
    std::mt19937_64 rng(4);
    const CsrMatrix full = csr_from_coo(oracle::random_coo(rng, 8, 8, 2.0));
    const BlockedMatrix bm = to_blocked(full, {8, 8});
    // Per-block payload: subtract the row-pointer terms of each format.
    const std::uint64_t blocked = blocked_footprint_bytes(bm) - 4 * (static_cast<std::uint64_t>(bm.block_rows()) + 1);
    const std::uint64_t csr = csr_footprint_bytes(full) - 4 * 9;
    o.require(bm.num_blocks() == 1 && blocked == 516, "blocked bytes " + std::to_string(blocked));
    o.require(csr == 768, "CSR bytes " + std::to_string(csr));
    o.require(break_even_nnz({8, 8}) == 44, "break-even " + std::to_string(break_even_nnz({8, 8})));
    const double density = block_density_analysis(full, {8, 8}).break_even_density;
    o.require(density == 0.6875, "break-even density " + fmt("%.4f", density));
    o.require(!block_saves_memory({8, 8}, 43) && block_saves_memory({8, 8}, 44), "tie handling at z = 43/44");
    if (o.pass) o.detail = "516 vs 768 bytes; break-even 44/64 = 68.75% (published rounded claim: 70%)";
    return o;
  });

  report(5, "byte formulas against independent recomputation", [] {
    Outcome o;
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
      const std::uint64_t n = std::uniform_int_distribution<std::uint64_t>(1, 300)(rng);
      const std::uint64_t tau = std::uniform_int_distribution<std::uint64_t>(0, std::min<std::uint64_t>(n * n, 2000))(rng);
      const std::uint64_t k = std::uniform_int_distribution<std::uint64_t>(1, 64)(rng);
      // Matrix with exactly tau distinct positions.
      std::vector<std::uint64_t> cells(n * n);
      std::iota(cells.begin(), cells.end(), 0);
      std::shuffle(cells.begin(), cells.end(), rng);
      CooEntries coo{static_cast<index_t>(n), static_cast<index_t>(n), {}};
      for (std::uint64_t e = 0; e < tau; ++e)
        coo.entries.push_back({static_cast<index_t>(cells[e] / n), static_cast<index_t>(cells[e] % n), 1.0});
      const CsrMatrix a = csr_from_coo(coo);
      // Spreadsheet columns: vectors, row pointers, nonzeros.
      const std::uint64_t vec_bytes = 2 * n * 8;
      const std::uint64_t ptr_bytes = (n + 1) * 4;
      const std::uint64_t nz_bytes = tau * (8 + 4);
      const std::uint64_t spmv_expected = vec_bytes + ptr_bytes + nz_bytes;
      const std::uint64_t spmm_expected = 8 * n * k + 8 * n * k + (n + 1) * 4 + tau * (8 + 4);
      o.require(spmv_expected == 4 + 20 * n + 12 * tau, "spreadsheet identity");
      o.require(spmv_bytes(a).application == spmv_expected,
                "spmv bytes n=" + std::to_string(n) + " tau=" + std::to_string(tau));
      o.require(spmv_bytes(a).naive == nz_bytes, "naive bytes");
      o.require(spmm_bytes(a, k) == spmm_expected,
                "spmm bytes n=" + std::to_string(n) + " tau=" + std::to_string(tau) + " k=" + std::to_string(k));
    }
    if (o.pass) o.detail = "20/20 tuples exact";
    return o;
  });

  report(6, "cache model equals brute-force LRU simulation on 100 instances", [] {
    Outcome o;
    std::mt19937_64 rng(6);
    const unsigned cores[] = {1, 2, 4};
    const index_t chunks[] = {1, 4, 64};
    const std::optional<std::uint64_t> caps[] = {1, 8, std::nullopt};
    for (int t = 0; t < 100; ++t) {
      const unsigned c = cores[t % 3];
      const index_t ch = chunks[(t / 3) % 3];
      const auto cap = caps[(t / 9) % 3];
      const index_t m = std::uniform_int_distribution<index_t>(1, 300)(rng);
      const index_t n = std::uniform_int_distribution<index_t>(1, 300)(rng);
      const double dens = std::uniform_real_distribution<double>(0.005, 0.15)(rng);
      const CsrMatrix a = csr_from_coo(oracle::random_coo(rng, m, n, dens));
      CacheModelConfig cfg{c, ch, 64, cap ? std::optional<std::uint64_t>(*cap * 64) : std::nullopt};
      const auto got = vector_access_model(a, cfg).per_core_misses;
      const auto want = oracle::brute_force_misses(a, c, ch, 64, cap);
      o.require(got == want, "instance " + std::to_string(t) + " differs");
    }
    if (o.pass) o.detail = "100/100 instances, all 27 (cores, chunk, capacity) combinations";
    return o;
  }, 60.0);

  report(7, "RCM permutation validity, stencil(32) bandwidth, determinism", [&] {
    Outcome o;
    for (std::size_t i = 0; i < suite.size(); i += 5) {
      const CsrMatrix& a = suite[i].a;
      if (!a.square()) continue;
      const Permutation p = rcm_order(a);
      std::vector<index_t> v(p.values().begin(), p.values().end());
      std::sort(v.begin(), v.end());
      std::vector<index_t> id(v.size());
      std::iota(id.begin(), id.end(), 0);
      o.require(v == id && p.size() == a.rows(), "not a permutation on instance " + std::to_string(i));
      o.require(rcm_order(a) == p, "nondeterministic on instance " + std::to_string(i));
    }
    const CsrMatrix s = gen_stencil5(32);
    const Permutation p = rcm_order(s);
    const index_t before = static_cast<index_t>(oracle::dense_bandwidth(csr_to_dense(s)));
    const index_t after = static_cast<index_t>(oracle::dense_bandwidth(csr_to_dense(permute_symmetric(s, p))));
    o.require(before == 32, "natural bandwidth " + std::to_string(before));
    o.require(after <= 32, "RCM bandwidth " + std::to_string(after));
    for (int r = 0; r < 5; ++r) o.require(rcm_order(s) == p, "stencil ordering changed between runs");
    if (o.pass) o.detail = "stencil(32) bandwidth " + std::to_string(before) + " -> " + std::to_string(after);
    return o;
  });

  report(8, "timing protocol: 60 of 70 kept, flush excluded", [] {
    Outcome o;
    // Virtual time: exact accounting.
    double t = 0.0;
    int flushes = 0;
    TimingHooks fake{[&] { return t; }, [&] {
                       ++flushes;
                       t += 5e-3;
                     }};
    const TimingStats vs = time_kernel([&] { t += 1e-3; }, BenchProtocol{}, fake);
    o.require(vs.samples.size() == 60, "virtual: kept " + std::to_string(vs.samples.size()));
    o.require(flushes == 70, "virtual: flushes " + std::to_string(flushes));
    o.require(std::abs(vs.mean - 1e-3) < 1e-12, "virtual mean " + fmt("%.9f", vs.mean));

    // Real clock: 1 ms busy-wait closure and an instrumented flush that
    // itself takes 2 ms; the flush must not show up in the samples.
    const double res = timer_resolution_seconds();
    int real_flushes = 0;
    TimingHooks instrumented{{}, [&] {
                               ++real_flushes;
                               const double f0 = steady_seconds();
                               while (steady_seconds() - f0 < 2e-3) {
                               }
                             }};
    auto busy = [] {
      const double t0 = steady_seconds();
      while (steady_seconds() - t0 < 1e-3) {
      }
    };
    const TimingStats rs = time_kernel(busy, BenchProtocol{}, instrumented);
    o.require(rs.samples.size() == 60, "real: kept " + std::to_string(rs.samples.size()));
    o.require(real_flushes == 70, "real: flushes " + std::to_string(real_flushes));
    o.require(rs.mean >= 1e-3 - res && rs.mean <= 1.25e-3,
              "real mean " + fmt("%.6f", rs.mean) + " s outside [1 ms, 1.25 ms]");
    if (o.pass)
      o.detail = "virtual mean 1.000 ms; real mean " + fmt("%.4f", rs.mean * 1e3) + " ms, timer resolution " +
                 fmt("%.0f", res * 1e9) + " ns";
    return o;
  });

  report(9, "host-independent performance properties", [] {
    Outcome o;
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const CsrMatrix a = gen_stencil5(2048);
    SweepOptions opt;  // defaults: 70 runs, 10 discarded, flush between runs
    opt.cache_model = CacheModelConfig::infinite();
    SweepGrid grid;
    grid.threads = {1};
    grid.policies = {Policy::kDynamic};
    grid.chunks = {64};
    const auto mv = sweep(a, "stencil:2048", KernelFamily::kSpmv, grid, opt);

    // (a) GFlop/s recomputed from the logged mean time.
    const CsrMatrix small = gen_stencil5(256);
    SweepGrid mm_grid = grid;
    mm_grid.ks = {8, 16};
    SweepOptions quick = opt;
    quick.protocol = {20, 5, true, 8u << 20};
    auto mm = sweep(small, "stencil:256", KernelFamily::kSpmm, mm_grid, quick);
    const double tau = static_cast<double>(a.nnz());
    for (const auto& p : mv) {
      o.require(p.result.has_value(), "spmv point failed: " + p.error);
      if (!p.result) continue;
      const double expect = 2.0 * tau / p.result->timing.mean / 1e9;
      o.require(std::abs(p.result->gflops - expect) <= 1e-12 * expect, "spmv GFlop/s not 2 tau / t");
    }
    for (const auto& p : mm) {
      o.require(p.result.has_value(), "spmm point failed: " + p.error);
      if (!p.result) continue;
      const double expect = 2.0 * static_cast<double>(small.nnz()) * static_cast<double>(p.config.k) /
                            p.result->timing.mean / 1e9;
      o.require(std::abs(p.result->gflops - expect) <= 1e-12 * expect, "spmm GFlop/s not 2 tau k / t");
    }

    // (b) application bandwidth bounded by the host's wide read bandwidth.
    double read_gbps = 0.0;
    for (int rep = 0; rep < 3; ++rep)
      read_gbps = std::max(read_gbps, microbench_read_sum(256u << 20, hw, ElementWidth::kWide, 2).gbps);
    const double app = mv.empty() || !mv[0].result ? 0.0 : mv[0].result->application_gbps;
    o.require(app > 0.0 && app <= 1.25 * read_gbps,
              "application " + fmt("%.2f", app) + " GB/s vs read " + fmt("%.2f", read_gbps) + " GB/s");

    // (c) parallel speedup, only meaningful with at least 4 cores.
    std::string c_note;
    if (hw >= 4) {
      SweepGrid g4 = grid;
      g4.threads = {1, 4};
      const auto pts = sweep(a, "stencil:2048", KernelFamily::kSpmv, g4, opt);
      double t1 = 0.0, t4 = 0.0;
      for (const auto& p : pts)
        if (p.result) (p.config.schedule.threads == 1 ? t1 : t4) = p.result->timing.mean;
      const double speedup = t4 > 0.0 ? t1 / t4 : 0.0;
      o.require(speedup >= 1.3, "4-thread speedup " + fmt("%.2f", speedup));
      c_note = "(c) speedup " + fmt("%.2f", speedup) + "x";
    } else {
      c_note = "(c) not evaluated: host has " + std::to_string(hw) + " hardware thread(s), needs >= 4";
    }
    if (o.pass)
      o.detail = "(a) rates recomputed; (b) application " + fmt("%.2f", app) + " GB/s <= 1.25 x read " +
                 fmt("%.2f", read_gbps) + " GB/s; " + c_note;
    else
      o.detail += "; " + c_note;
    return o;
  });

  report(10, "SpMM/SpMV consistency", [&] {
    Outcome o;
    std::mt19937_64 rng(10);
    for (std::size_t idx = 0; idx < suite.size(); ++idx) {
      const CsrMatrix& a = suite[idx].a;
      const auto x = random_vector(rng, static_cast<std::size_t>(a.cols()));
      const DenseMatrix y = spmm(a, DenseMatrix(x.size(), 1, x), {Policy::kStatic, 16, 2});
      o.require(std::vector<double>(y.data().begin(), y.data().end()) == spmv_serial(a, x),
                "k=1 spmm differs from spmv on instance " + std::to_string(idx));
      for (std::size_t k : {8u, 16u}) {
        const DenseMatrix X(x.size(), k, random_vector(rng, x.size() * k));
        o.require(spmm(a, X, {}, SpmmPath::kGeneric) == spmm(a, X, {Policy::kDynamic, 4, 4}, SpmmPath::kWide),
                  "generic and wide paths differ at k=" + std::to_string(k) + " on instance " + std::to_string(idx));
      }
    }
    if (o.pass) o.detail = "500 instances, k = 1, 8, 16";
    return o;
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
