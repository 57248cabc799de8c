#pragma once

// Command implementations behind the sparsebench executable. Each command
// returns a Table; run() dispatches and writes it as CSV or JSON.

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "sparsebench/bench.hpp"
#include "sparsebench/kernels.hpp"
#include "sparsebench/matrix.hpp"

namespace sparsebench::cli {

enum class OutputFormat { kCsv, kJson };

using Cell = std::variant<std::string, std::int64_t, std::uint64_t, double, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Locale-independent, shortest round-trip representation.
std::string format_cell(const Cell& c);
void write_csv(const Table& t, std::ostream& out);
void write_json(const Table& t, std::ostream& out);

struct RunSpec {
  std::string subcommand;
  std::string matrix;  // file path | collection name | stencil:<side>
  OutputFormat format = OutputFormat::kCsv;
  std::string out;     // empty = stdout

  // Kernel sweeps. Empty threads = 1, 2, 4, ... up to the hardware count.
  std::vector<unsigned> threads;
  std::vector<Policy> policies{Policy::kDynamic, Policy::kStatic};
  std::vector<index_t> chunks{32, 64};
  std::vector<std::uint64_t> ks{16};
  unsigned runs = 70;
  unsigned discard = 10;
  bool flush = true;
  std::size_t flush_mb = 0;  // 0 = 4 x last-level cache

  // Cache model.
  unsigned cores = 61;
  index_t model_chunk = 64;
  std::uint64_t cache_kb = 512;  // 0 = infinite only

  std::vector<BlockDims> blocks;  // spmv: run the blocked kernel; analyze: subset
  bool rcm = false;

  // Microbenchmarks. Empty workers = 1, 2, 4, ... up to the hardware count.
  std::vector<unsigned> workers;
  std::size_t buffer_mb = 16;
  std::vector<ElementWidth> widths{ElementWidth::k8, ElementWidth::k32, ElementWidth::kWide};
  unsigned passes = 4;

  index_t side = 0;       // gen-stencil
  std::string permuted;   // rcm: write the reordered matrix here
};

struct LoadedMatrix {
  std::string id;
  CsrMatrix matrix;
};

/// "stencil:<s>", an existing Matrix Market file, or a collection name
/// (fetched through the cache).
LoadedMatrix load_matrix(const std::string& source);

std::vector<unsigned> power_of_two_ladder(unsigned max);

Table cmd_stats(const RunSpec& spec);
Table cmd_spmv(const RunSpec& spec, const TimingHooks& hooks = {});
Table cmd_spmm(const RunSpec& spec, const TimingHooks& hooks = {});
Table cmd_analyze(const RunSpec& spec);
Table cmd_rcm(const RunSpec& spec);
Table cmd_microbench(const RunSpec& spec);
Table cmd_fetch(const RunSpec& spec);
Table cmd_gen_stencil(const RunSpec& spec);

/// Runs spec.subcommand and writes its table to spec.out (or `out`).
/// Returns the process exit code; errors are reported on `err`.
int run(const RunSpec& spec, std::ostream& out, std::ostream& err, const TimingHooks& hooks = {});

}  // namespace sparsebench::cli
