// sparsebench: command-line front end for the sparse kernels, the
// performance model and the benchmarking protocol.

#include <iostream>

#include "CLI11.hpp"
#include "sparsebench/cli.hpp"

namespace sb = sparsebench;
using sparsebench::cli::RunSpec;

namespace {

struct RawOptions {
  std::vector<std::string> policies;
  std::vector<std::string> blocks;
  std::vector<std::string> widths;
  std::string format = "csv";
  bool no_flush = false;
};

void add_matrix(CLI::App* sub, RunSpec& spec) {
  sub->add_option("--matrix,-m", spec.matrix, "Matrix Market file, collection name or stencil:<side>")
      ->required();
}

void add_output(CLI::App* sub, RunSpec& spec, RawOptions& raw) {
  sub->add_option("--format", raw.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out,-o", spec.out, "Output file (default: stdout)");
}

void add_model(CLI::App* sub, RunSpec& spec) {
  sub->add_option("--cores", spec.cores, "Cores in the cache model")->check(CLI::Range(1u, 1u << 16));
  sub->add_option("--model-chunk", spec.model_chunk, "Rows per chunk in the cache model")
      ->check(CLI::Range(1, 1 << 24));
  sub->add_option("--cache-kb", spec.cache_kb, "Per-core cache capacity in kB (0 = infinite only)");
}

void add_kernel(CLI::App* sub, RunSpec& spec, RawOptions& raw) {
  sub->add_option("--threads,-t", spec.threads, "Thread counts to sweep")->delimiter(',');
  sub->add_option("--chunk", spec.chunks, "Chunk sizes to sweep")->delimiter(',')->check(CLI::PositiveNumber);
  sub->add_option("--policy", raw.policies, "Scheduling policies to sweep")
      ->delimiter(',')
      ->check(CLI::IsMember({"static", "dynamic"}));
  sub->add_option("--runs", spec.runs, "Runs per configuration")->check(CLI::Range(1u, 1000000u));
  sub->add_option("--discard", spec.discard, "Leading runs excluded from statistics");
  sub->add_flag("--no-flush", raw.no_flush, "Do not flush caches between runs");
  sub->add_option("--flush-mb", spec.flush_mb, "Flush buffer size in MiB (default: 4 x LLC)");
  sub->add_flag("--rcm", spec.rcm, "Reorder with reverse Cuthill-McKee first");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse matrix multiplication kernels, performance model and benchmarks"};
  app.require_subcommand(1);
  RunSpec spec;
  RawOptions raw;

  auto* stats = app.add_subcommand("stats", "Print matrix statistics");
  add_matrix(stats, spec);
  add_output(stats, spec, raw);

  auto* spmv = app.add_subcommand("spmv", "Benchmark SpMV over a schedule grid");
  add_matrix(spmv, spec);
  add_output(spmv, spec, raw);
  add_kernel(spmv, spec, raw);
  add_model(spmv, spec);
  spmv->add_option("--blocks", raw.blocks, "Use register blocking with these block dims (e.g. 8x1)")
      ->delimiter(',');

  auto* spmm = app.add_subcommand("spmm", "Benchmark SpMM over a schedule grid");
  add_matrix(spmm, spec);
  add_output(spmm, spec, raw);
  add_kernel(spmm, spec, raw);
  add_model(spmm, spec);
  spmm->add_option("--k", spec.ks, "Dense column counts")->delimiter(',')->check(CLI::PositiveNumber);

  auto* analyze = app.add_subcommand("analyze", "Emit UCLD, byte model, cache model and blocking metrics");
  add_matrix(analyze, spec);
  add_output(analyze, spec, raw);
  add_model(analyze, spec);
  analyze->add_option("--blocks", raw.blocks, "Block dims to analyze (default: all seven)")->delimiter(',');
  analyze->add_option("--k", spec.ks, "Dense column counts for SpMM byte counts")->delimiter(',');
  analyze->add_flag("--rcm", spec.rcm, "Also report metrics after RCM reordering");

  auto* rcm = app.add_subcommand("rcm", "Reorder with reverse Cuthill-McKee and compare metrics");
  add_matrix(rcm, spec);
  add_output(rcm, spec, raw);
  add_model(rcm, spec);
  rcm->add_option("--permuted", spec.permuted, "Write the reordered matrix (Matrix Market)");

  auto* micro = app.add_subcommand("microbench", "Host read/write bandwidth microbenchmarks");
  add_output(micro, spec, raw);
  micro->add_option("--workers,-w", spec.workers, "Worker counts")->delimiter(',');
  micro->add_option("--buffer-mb", spec.buffer_mb, "Buffer per worker in MiB")->check(CLI::Range(1, 1 << 16));
  micro->add_option("--element", raw.widths, "Read element widths (8bit, 32bit, wide)")
      ->delimiter(',')
      ->check(CLI::IsMember({"8bit", "32bit", "wide"}));
  micro->add_option("--passes", spec.passes, "Passes over each buffer")->check(CLI::Range(1u, 100000u));

  auto* fetch = app.add_subcommand("fetch", "Download a collection matrix into the cache");
  fetch->add_option("--matrix,-m", spec.matrix, "Group/name or reference corpus name")->required();
  add_output(fetch, spec, raw);

  auto* gen = app.add_subcommand("gen-stencil", "Write the 5-point stencil matrix as Matrix Market");
  gen->add_option("--side,-s", spec.side, "Grid side length")->required()->check(CLI::PositiveNumber);
  gen->add_option("--out,-o", spec.out, "Output .mtx path")->required();
  gen->add_option("--format", raw.format, "Summary format")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // help/version exit 0; any usage error is 2
  }

  spec.subcommand = app.get_subcommands().front()->get_name();
  spec.format = raw.format == "json" ? sb::cli::OutputFormat::kJson : sb::cli::OutputFormat::kCsv;
  spec.flush = !raw.no_flush;
  try {
    if (!raw.policies.empty()) {
      spec.policies.clear();
      for (const auto& p : raw.policies) spec.policies.push_back(sb::parse_policy(p));
    }
    for (const auto& b : raw.blocks) spec.blocks.push_back(sb::parse_block_dims(b));
    if (!raw.widths.empty()) {
      spec.widths.clear();
      for (const auto& w : raw.widths) spec.widths.push_back(sb::parse_element_width(w));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return sb::cli::run(spec, std::cout, std::cerr);
}
