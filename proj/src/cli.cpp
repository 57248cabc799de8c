#include "sparsebench/cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"

#include "sparsebench/analysis.hpp"
#include "sparsebench/fetch.hpp"
#include "sparsebench/mmio.hpp"
#include "sparsebench/ordering.hpp"

namespace sparsebench::cli {

namespace {

std::string double_repr(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

unsigned hardware_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

BenchProtocol protocol_of(const RunSpec& spec) {
  BenchProtocol p;
  p.total_runs = spec.runs;
  p.discard_runs = spec.discard;
  p.flush_between = spec.flush;
  p.flush_buffer_bytes = spec.flush_mb << 20;
  return p;
}

CacheModelConfig model_of(const RunSpec& spec, bool finite) {
  CacheModelConfig c;
  c.cores = spec.cores;
  c.chunk_rows = spec.model_chunk;
  if (finite) c.cache_capacity_bytes = spec.cache_kb * 1024;
  else c.cache_capacity_bytes.reset();
  return c;
}

std::string model_label(const RunSpec& spec, bool finite) {
  return "cores=" + std::to_string(spec.cores) + ";chunk=" + std::to_string(spec.model_chunk) +
         ";cache=" + (finite ? std::to_string(spec.cache_kb) + "kB" : std::string("inf"));
}

Table sweep_table(const std::vector<SweepPoint>& points) {
  Table t;
  t.columns = {"matrix", "kernel", "blocks", "k",      "threads",    "policy",
               "chunk",  "runs_kept", "mean_s", "min_s", "max_s",  "stddev_s",
               "flops",  "gflops", "naive_gbps", "application_gbps", "estimated_gbps", "best",
               "error"};
  for (const auto& p : points) {
    const auto& c = p.config;
    std::vector<Cell> row{c.matrix,
                          to_string(c.family),
                          c.blocks ? to_string(*c.blocks) : std::string(),
                          static_cast<std::uint64_t>(c.k),
                          static_cast<std::uint64_t>(c.schedule.threads),
                          to_string(c.schedule.policy),
                          static_cast<std::int64_t>(c.schedule.chunk)};
    if (p.result) {
      const auto& r = *p.result;
      row.insert(row.end(), {static_cast<std::uint64_t>(r.timing.samples.size()), r.timing.mean, r.timing.min,
                             r.timing.max, r.timing.stddev, r.flops, r.gflops, r.naive_gbps, r.application_gbps,
                             r.estimated_gbps, p.best, std::string()});
    } else {
      for (int i = 0; i < 11; ++i) row.emplace_back(std::string());
      row.emplace_back(p.best);
      row.emplace_back(p.error);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

SweepGrid grid_of(const RunSpec& spec) {
  SweepGrid g;
  g.threads = spec.threads.empty() ? power_of_two_ladder(hardware_threads()) : spec.threads;
  g.policies = spec.policies;
  g.chunks = spec.chunks;
  g.ks = spec.ks;
  if (!spec.blocks.empty()) g.blocks = spec.blocks;
  return g;
}

SweepOptions sweep_options(const RunSpec& spec, const TimingHooks& hooks) {
  SweepOptions o;
  o.protocol = protocol_of(spec);
  o.hooks = hooks;
  o.cache_model = model_of(spec, spec.cache_kb != 0);
  return o;
}

LoadedMatrix load_for_kernels(const RunSpec& spec) {
  LoadedMatrix lm = load_matrix(spec.matrix);
  if (spec.rcm) {
    lm.matrix = permute_symmetric(lm.matrix, rcm_order(lm.matrix));
    lm.id += "+rcm";
  }
  return lm;
}

struct OrderingMetrics {
  double ucld;
  std::int64_t bandwidth;
  double va_infinite;
  double va_finite;
};

OrderingMetrics ordering_metrics(const RunSpec& spec, const CsrMatrix& a) {
  OrderingMetrics m{};
  m.ucld = a.nnz() ? ucld(a).mean : 0.0;
  m.bandwidth = a.square() ? matrix_bandwidth(a) : -1;
  m.va_infinite = vector_access_model(a, model_of(spec, false)).vector_access_ratio;
  m.va_finite = spec.cache_kb ? vector_access_model(a, model_of(spec, true)).vector_access_ratio : m.va_infinite;
  return m;
}

}  // namespace

std::string format_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) return v;
        else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else if constexpr (std::is_same_v<T, double>) return double_repr(v);
        else return std::to_string(v);
      },
      c);
}

void write_csv(const Table& t, std::ostream& out) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << csv_escape(t.columns[i]);
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(format_cell(row[i]));
    out << '\n';
  }
}

void write_json(const Table& t, std::ostream& out) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size() && i < t.columns.size(); ++i)
      std::visit([&](const auto& v) { obj[t.columns[i]] = v; }, row[i]);
    arr.push_back(std::move(obj));
  }
  out << arr.dump(2) << '\n';
}

std::vector<unsigned> power_of_two_ladder(unsigned max) {
  std::vector<unsigned> out;
  for (unsigned t = 1; t < max; t *= 2) out.push_back(t);
  out.push_back(max);
  return out;
}

LoadedMatrix load_matrix(const std::string& source) {
  if (source.empty()) throw Error("no matrix given (use --matrix)");
  constexpr std::string_view prefix = "stencil:";
  if (source.rfind(prefix, 0) == 0) {
    const std::string_view digits(source.data() + prefix.size(), source.size() - prefix.size());
    index_t side = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), side);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || side < 1)
      throw Error("bad stencil spec '" + source + "'");
    return {source, gen_stencil5(side)};
  }
  if (std::filesystem::exists(source)) return {source, load_matrix_market(source)};
  const MatrixSource src = resolve_source(source);
  return {src.name, load_matrix_market(fetch_matrix(src))};
}

Table cmd_stats(const RunSpec& spec) {
  const LoadedMatrix lm = load_matrix(spec.matrix);
  const MatrixStats st = compute_stats(lm.matrix);
  Table t;
  t.columns = {"matrix", "rows", "cols", "nonzeros", "density", "avg_nnz_per_row", "max_nnz_per_row",
               "max_nnz_per_col"};
  t.rows.push_back({lm.id, static_cast<std::int64_t>(st.rows), static_cast<std::int64_t>(st.cols),
                    static_cast<std::uint64_t>(st.nonzeros), format_density(st.density),
                    format_avg(st.avg_nnz_per_row), static_cast<std::int64_t>(st.max_nnz_per_row),
                    static_cast<std::int64_t>(st.max_nnz_per_col)});
  return t;
}

Table cmd_spmv(const RunSpec& spec, const TimingHooks& hooks) {
  const LoadedMatrix lm = load_for_kernels(spec);
  const KernelFamily family = spec.blocks.empty() ? KernelFamily::kSpmv : KernelFamily::kBlocked;
  return sweep_table(sweep(lm.matrix, lm.id, family, grid_of(spec), sweep_options(spec, hooks)));
}

Table cmd_spmm(const RunSpec& spec, const TimingHooks& hooks) {
  const LoadedMatrix lm = load_for_kernels(spec);
  return sweep_table(sweep(lm.matrix, lm.id, KernelFamily::kSpmm, grid_of(spec), sweep_options(spec, hooks)));
}

Table cmd_analyze(const RunSpec& spec) {
  const LoadedMatrix lm = load_matrix(spec.matrix);
  const CsrMatrix& a = lm.matrix;
  Table t;
  t.columns = {"matrix", "metric", "config", "value"};
  auto add = [&](std::string metric, std::string config, Cell value) {
    t.rows.push_back({lm.id, std::move(metric), std::move(config), std::move(value)});
  };
  add("rows", "", static_cast<std::int64_t>(a.rows()));
  add("cols", "", static_cast<std::int64_t>(a.cols()));
  add("nonzeros", "", static_cast<std::uint64_t>(a.nnz()));
  add("ucld", "", ucld(a).mean);
  if (a.square()) add("matrix_bandwidth", "", static_cast<std::int64_t>(matrix_bandwidth(a)));
  add("spmv_flops", "", spmv_flops(a));
  const SpmvBytes sb = spmv_bytes(a);
  add("naive_bytes", "", sb.naive);
  add("application_bytes", "", sb.application);
  for (std::uint64_t k : spec.ks) add("spmm_bytes", "k=" + std::to_string(k), spmm_bytes(a, k));

  std::vector<bool> caches{false};
  if (spec.cache_kb) caches.push_back(true);
  for (bool finite : caches) {
    const CacheModelReport rep = vector_access_model(a, model_of(spec, finite));
    const BandwidthModel bw = bandwidth_model(a, 0, rep);
    const std::string label = model_label(spec, finite);
    add("vector_misses", label, rep.total_misses);
    add("vector_bytes", label, rep.total_vector_bytes);
    add("vector_access_ratio", label, rep.vector_access_ratio);
    add("estimated_actual_bytes", label, bw.estimated_actual_bytes);
  }

  const std::vector<BlockDims> dims =
      spec.blocks.empty() ? std::vector<BlockDims>(supported_block_dims().begin(), supported_block_dims().end())
                          : spec.blocks;
  for (BlockDims d : dims) {
    const BlockDensity bd = block_density_analysis(a, d);
    const std::string label = to_string(d);
    add("block_count", label, static_cast<std::uint64_t>(bd.blocks));
    add("block_fill_ratio", label, bd.fill_ratio);
    add("block_break_even_nnz", label, bd.break_even_nnz);
    add("block_break_even_density", label, bd.break_even_density);
    add("block_blocked_bytes", label, bd.blocked_bytes);
    add("block_csr_bytes", label, bd.csr_bytes);
    add("block_saves_memory", label, bd.saves_memory);
  }

  if (spec.rcm) {
    const CsrMatrix b = permute_symmetric(a, rcm_order(a));
    const OrderingMetrics before = ordering_metrics(spec, a);
    const OrderingMetrics after = ordering_metrics(spec, b);
    add("rcm_matrix_bandwidth", "", after.bandwidth);
    add("rcm_ucld", "", after.ucld);
    add("rcm_vector_access_ratio", model_label(spec, false), after.va_infinite);
    if (spec.cache_kb) add("rcm_vector_access_ratio", model_label(spec, true), after.va_finite);
    // Positive deltas are improvements.
    add("rcm_delta_ucld", "", after.ucld - before.ucld);
    add("rcm_delta_vector_access", model_label(spec, false), before.va_infinite - after.va_infinite);
    if (spec.cache_kb)
      add("rcm_delta_vector_access", model_label(spec, true), before.va_finite - after.va_finite);
  }
  return t;
}

Table cmd_rcm(const RunSpec& spec) {
  const LoadedMatrix lm = load_matrix(spec.matrix);
  const Permutation p = rcm_order(lm.matrix);
  const CsrMatrix b = permute_symmetric(lm.matrix, p);
  if (!spec.permuted.empty()) write_matrix_market(b, spec.permuted);
  const OrderingMetrics before = ordering_metrics(spec, lm.matrix);
  const OrderingMetrics after = ordering_metrics(spec, b);
  Table t;
  t.columns = {"matrix", "bandwidth_before", "bandwidth_after", "ucld_before", "ucld_after",
               "vector_access_before", "vector_access_after", "permuted_path"};
  t.rows.push_back({lm.id, before.bandwidth, after.bandwidth, before.ucld, after.ucld, before.va_finite,
                    after.va_finite, spec.permuted});
  return t;
}

Table cmd_microbench(const RunSpec& spec) {
  const std::vector<unsigned> ladder =
      spec.workers.empty() ? power_of_two_ladder(hardware_threads()) : spec.workers;
  const std::size_t bytes = spec.buffer_mb << 20;
  Table t;
  t.columns = {"test", "element", "workers", "bytes_per_worker", "passes", "seconds", "gbps", "checksum"};
  for (ElementWidth w : spec.widths)
    for (unsigned workers : ladder) {
      const MicrobenchResult r = microbench_read_sum(bytes, workers, w, spec.passes);
      t.rows.push_back({std::string("read_sum"), to_string(w), static_cast<std::uint64_t>(workers),
                        static_cast<std::uint64_t>(r.bytes_per_worker), static_cast<std::uint64_t>(r.passes),
                        r.seconds, r.gbps, r.checksum});
    }
  for (unsigned workers : ladder) {
    const MicrobenchResult r = microbench_write_fill(bytes, workers, spec.passes);
    t.rows.push_back({std::string("write_fill"), std::string("8bit"), static_cast<std::uint64_t>(workers),
                      static_cast<std::uint64_t>(r.bytes_per_worker), static_cast<std::uint64_t>(r.passes),
                      r.seconds, r.gbps, r.checksum});
  }
  return t;
}

Table cmd_fetch(const RunSpec& spec) {
  const MatrixSource src = resolve_source(spec.matrix);
  const auto path = fetch_matrix(src);
  Table t;
  t.columns = {"matrix", "url", "path"};
  t.rows.push_back({src.name, src.url, path.string()});
  return t;
}

Table cmd_gen_stencil(const RunSpec& spec) {
  if (spec.side < 1) throw Error("gen-stencil needs --side >= 1");
  if (spec.out.empty()) throw Error("gen-stencil needs --out <file.mtx>");
  const CsrMatrix a = gen_stencil5(spec.side);
  write_matrix_market(a, spec.out);
  Table t;
  t.columns = {"matrix", "rows", "nonzeros", "path"};
  t.rows.push_back({"stencil:" + std::to_string(spec.side), static_cast<std::int64_t>(a.rows()),
                    static_cast<std::uint64_t>(a.nnz()), spec.out});
  return t;
}

int run(const RunSpec& spec, std::ostream& out, std::ostream& err, const TimingHooks& hooks) {
  try {
    Table t;
    const std::string& cmd = spec.subcommand;
    bool table_to_out_path = true;
    if (cmd == "stats") t = cmd_stats(spec);
    else if (cmd == "spmv") t = cmd_spmv(spec, hooks);
    else if (cmd == "spmm") t = cmd_spmm(spec, hooks);
    else if (cmd == "analyze") t = cmd_analyze(spec);
    else if (cmd == "rcm") t = cmd_rcm(spec);
    else if (cmd == "microbench") t = cmd_microbench(spec);
    else if (cmd == "fetch") t = cmd_fetch(spec);
    else if (cmd == "gen-stencil") {
      t = cmd_gen_stencil(spec);
      table_to_out_path = false;  // --out names the generated matrix
    } else {
      err << "error: unknown subcommand '" << cmd << "'\n";
      return 2;
    }

    auto emit = [&](std::ostream& os) {
      if (spec.format == OutputFormat::kJson) write_json(t, os);
      else write_csv(t, os);
    };
    if (table_to_out_path && !spec.out.empty()) {
      std::ofstream f(spec.out, std::ios::trunc);
      if (!f) throw Error("cannot open " + spec.out + " for writing");
      emit(f);
      if (!f) throw Error("write failed for " + spec.out);
    } else {
      emit(out);
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace sparsebench::cli
