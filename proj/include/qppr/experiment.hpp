#pragma once

// Experiment harness behind the `qppr` subcommands: graph loading, bit-width
// sweeps against a float64 golden run, convergence curves, and file
// validation. Every output byte is a function of the spec and its seed; the
// thread count only changes wall-clock time.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qppr/arith.hpp"
#include "qppr/datagen.hpp"
#include "qppr/graph.hpp"
#include "qppr/metrics.hpp"
#include "qppr/ppr.hpp"
#include "qppr/qcoo.hpp"
#include "qppr/rng.hpp"
#include "qppr/spmv.hpp"

#ifndef QPPR_DEFAULT_PRESETS
#define QPPR_DEFAULT_PRESETS "config/presets.json"
#endif

namespace qppr::experiment {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr double kConvergenceFloor = 1e-7;

namespace fs = std::filesystem;

// --- graph sources ----------------------------------------------------------

struct LoadedGraph {
  std::string label;
  EdgeList edges;
  nlohmann::json provenance;
};

/// `gen:NAME`, `qcoo:PATH`, `snap:PATH`, or a bare path (*.qcoo is binary,
/// anything else is read as SNAP text).
inline LoadedGraph load_graph(const std::string& source, const fs::path& presets_file,
                              std::optional<std::uint64_t> seed_override = std::nullopt) {
  LoadedGraph g;
  auto starts = [&](const char* prefix) { return source.rfind(prefix, 0) == 0; };
  if (starts("gen:")) {
    const std::string name = source.substr(4);
    const auto presets = datagen::load_presets(presets_file);
    datagen::Preset preset = datagen::find_preset(presets, name);
    if (seed_override) preset.spec.seed = *seed_override;
    g.label = name;
    g.edges = datagen::generate(preset.spec);
    g.provenance = {{"source", "generator"}, {"preset", name}, {"spec", datagen::to_json(preset.spec)}};
    if (preset.target_arcs) g.provenance["target_arcs"] = *preset.target_arcs;
    return g;
  }
  fs::path path;
  bool binary = false;
  if (starts("qcoo:")) {
    path = source.substr(5);
    binary = true;
  } else if (starts("snap:")) {
    path = source.substr(5);
  } else {
    path = source;
    binary = path.extension() == ".qcoo";
  }
  g.label = path.stem().string();
  if (binary) {
    const qcoo::RawCoo raw = qcoo::read_file(path);
    g.edges = qcoo::edge_list_of(raw);
    g.provenance = {{"source", "qcoo"}, {"path", path.string()}, {"stored_frac_bits", raw.frac_bits}};
  } else {
    datagen::SnapGraph snap = datagen::parse_snap_file(path);
    g.edges = std::move(snap.edges);
    g.provenance = {{"source", "snap"}, {"path", path.string()},
                    {"distinct_ids", snap.id_map.size()}};
  }
  return g;
}

// --- output bookkeeping -----------------------------------------------------

/// Removes every file it created unless commit() is reached.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir_.string() + ": " + ec.message());
  }
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& f : files_) fs::remove(f, ec);
  }

  fs::path path(const std::string& name) {
    files_.push_back(dir_ / name);
    return files_.back();
  }

  void write_text(const std::string& name, const std::string& content) {
    std::ofstream out(path(name), std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error(ErrorCode::kIo, "failed writing " + name);
  }

  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
  bool committed_ = false;
};

// Locale-independent, fixed-precision CSV fields.
inline std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, value);
  return buf;
}

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// --- specs ------------------------------------------------------------------

struct ExperimentSpec {
  std::string graph;
  std::vector<std::string> formats = {"19", "21", "23", "25", "f32"};
  std::uint32_t kappa = 8;
  int iterations = 10;
  std::uint32_t requests = 100;
  std::uint64_t seed = 42;
  fs::path out = "out";
  unsigned threads = 1;
  int golden_iterations = 100;
  double alpha = 0.85;
  std::vector<std::size_t> cutoffs = {10, 20, 50};
  fs::path presets = QPPR_DEFAULT_PRESETS;
  bool quiet = false;
};

inline nlohmann::json to_json(const ExperimentSpec& s) {
  return {{"graph", s.graph},
          {"formats", s.formats},
          {"kappa", s.kappa},
          {"iterations", s.iterations},
          {"requests", s.requests},
          {"seed", s.seed},
          {"threads", s.threads},
          {"golden_iterations", s.golden_iterations},
          {"alpha", s.alpha},
          {"cutoffs", s.cutoffs}};
}

inline void check(const ExperimentSpec& s) {
  if (s.formats.empty()) throw Error(ErrorCode::kInvalidArgument, "no formats to sweep");
  if (s.kappa == 0) throw Error(ErrorCode::kInvalidArgument, "kappa must be >= 1");
  if (s.requests == 0) throw Error(ErrorCode::kInvalidArgument, "requests must be >= 1");
  if (s.iterations < 0 || s.golden_iterations < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative iteration count");
  }
  for (const auto& f : s.formats) parse_format(f);
}

/// One normalized matrix per arithmetic.
using AnyGraph = std::variant<CooGraph<FixedArith>, CooGraph<Float32Arith>, CooGraph<Float64Arith>>;

inline AnyGraph normalize_any(const EdgeList& edges, const AnyArith& arith) {
  return std::visit([&](const auto& a) -> AnyGraph { return normalize(edges, a); }, arith);
}

struct ColumnResult {
  std::vector<double> scores;
  std::vector<double> norms;  // per-iteration step norms
};

struct BatchOutcome {
  std::vector<ColumnResult> columns;
  std::uint64_t saturations = 0;
};

inline BatchOutcome run_batch(const AnyGraph& graph, const PprConfig& config,
                              std::span<const Vertex> ids) {
  return std::visit(
      [&](const auto& g) {
        auto result = run_ppr(g, config, ids);
        BatchOutcome out;
        out.saturations = result.saturations;
        const auto curves = metrics::convergence_norms(result.trace);
        for (std::uint32_t k = 0; k < result.ranks.kappa; ++k) {
          ColumnResult c;
          c.scores = result.ranks.column(k);
          if (k < curves.size()) c.norms = curves[k];
          out.columns.push_back(std::move(c));
        }
        return out;
      },
      graph);
}

struct Workload {
  LoadedGraph graph;
  std::vector<Vertex> requests;
  std::vector<std::vector<Vertex>> batches;
  std::vector<AnyArith> formats;
};

inline Workload prepare(const ExperimentSpec& spec) {
  check(spec);
  Workload w;
  w.graph = load_graph(spec.graph, spec.presets);
  if (spec.requests > w.graph.edges.num_vertices) {
    throw Error(ErrorCode::kInvalidArgument, "more requests than vertices");
  }
  Rng rng(spec.seed);
  w.requests = sample_distinct(w.graph.edges.num_vertices, spec.requests, rng);
  for (std::size_t i = 0; i < w.requests.size(); i += spec.kappa) {
    const auto end = std::min<std::size_t>(i + spec.kappa, w.requests.size());
    w.batches.emplace_back(w.requests.begin() + static_cast<std::ptrdiff_t>(i),
                           w.requests.begin() + static_cast<std::ptrdiff_t>(end));
  }
  for (const auto& f : spec.formats) w.formats.push_back(parse_format(f));
  return w;
}

inline void log(const ExperimentSpec& spec, const std::string& msg) {
  if (!spec.quiet) std::cerr << "[qppr] " << msg << '\n';
}

// --- run --------------------------------------------------------------------

struct MetricsRow {
  std::uint32_t request_id = 0;
  std::size_t format_index = 0;
  int format_bits = 0;
  metrics::MetricsReport report;
};

struct RunOutcome {
  std::string graph;
  std::uint32_t num_vertices = 0;
  std::size_t num_arcs = 0;
  std::vector<int> format_bits;
  std::vector<MetricsRow> rows;  // sorted by (request_id, format order)
  std::vector<std::uint64_t> saturations;  // per format
};

inline const char* kMetricsHeader =
    "graph,format_bits,kappa,iterations,request_id,N,errors,edit_distance,ndcg,precision,mae,"
    "kendall_tau\n";

inline std::string metrics_csv(const RunOutcome& run, const ExperimentSpec& spec) {
  std::ostringstream out;
  out << kMetricsHeader;
  for (const auto& row : run.rows) {
    for (const auto& c : row.report.at) {
      out << run.graph << ',' << row.format_bits << ',' << spec.kappa << ',' << spec.iterations
          << ',' << row.request_id << ',' << c.n << ',' << c.errors << ',' << c.edit_distance
          << ',' << fmt("%.9f", c.ndcg) << ',' << fmt("%.4f", c.precision) << ','
          << fmt("%.6e", row.report.mae) << ',' << fmt("%.9f", row.report.kendall_tau) << '\n';
    }
  }
  return out.str();
}

struct SummaryStat {
  int format_bits = 0;
  std::size_t n = 0;
  double errors = 0, edit_distance = 0, ndcg = 0, precision = 0, mae = 0, kendall_tau = 0,
         ndcg_full = 0;
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  long double total = 0.0L;
  for (double x : v) total += x;
  return static_cast<double>(total / static_cast<long double>(v.size()));
}

/// Mean (first) and median (second) of every metric for one (format, N).
inline std::pair<SummaryStat, SummaryStat> summarize(const RunOutcome& run,
                                                     std::size_t format_index,
                                                     std::size_t cutoff_index) {
  std::vector<double> cols[7];
  std::size_t n = 0;
  for (const auto& row : run.rows) {
    if (row.format_index != format_index) continue;
    const auto& c = row.report.at[cutoff_index];
    n = c.n;
    cols[0].push_back(static_cast<double>(c.errors));
    cols[1].push_back(static_cast<double>(c.edit_distance));
    cols[2].push_back(c.ndcg);
    cols[3].push_back(c.precision);
    cols[4].push_back(row.report.mae);
    cols[5].push_back(row.report.kendall_tau);
    cols[6].push_back(row.report.ndcg_full);
  }
  auto fill = [&](auto reduce) {
    SummaryStat s;
    s.format_bits = run.format_bits[format_index];
    s.n = n;
    s.errors = reduce(cols[0]);
    s.edit_distance = reduce(cols[1]);
    s.ndcg = reduce(cols[2]);
    s.precision = reduce(cols[3]);
    s.mae = reduce(cols[4]);
    s.kendall_tau = reduce(cols[5]);
    s.ndcg_full = reduce(cols[6]);
    return s;
  };
  return {fill([](const std::vector<double>& v) { return mean(v); }),
          fill([](const std::vector<double>& v) { return median(v); })};
}

inline std::string summary_csv(const RunOutcome& run, const ExperimentSpec& spec) {
  std::ostringstream out;
  out << "graph,format_bits,kappa,iterations,N,statistic,errors,edit_distance,ndcg,precision,"
         "mae,kendall_tau,ndcg_full\n";
  for (std::size_t f = 0; f < run.format_bits.size(); ++f) {
    for (std::size_t c = 0; c < spec.cutoffs.size(); ++c) {
      const auto [mu, med] = summarize(run, f, c);
      for (const auto& [name, s] : {std::pair{"mean", mu}, std::pair{"median", med}}) {
        out << run.graph << ',' << s.format_bits << ',' << spec.kappa << ',' << spec.iterations
            << ',' << s.n << ',' << name << ',' << fmt("%.4f", s.errors) << ','
            << fmt("%.4f", s.edit_distance) << ',' << fmt("%.9f", s.ndcg) << ','
            << fmt("%.4f", s.precision) << ',' << fmt("%.6e", s.mae) << ','
            << fmt("%.9f", s.kendall_tau) << ',' << fmt("%.9f", s.ndcg_full) << '\n';
      }
    }
  }
  return out.str();
}

/// Sweeps every format for `iterations` steps and scores each request against
/// float64 PPR run for `golden_iterations` steps.
inline RunOutcome run_sweep(const ExperimentSpec& spec, const Workload& w) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutcome run;
  run.graph = w.graph.label;
  run.num_vertices = w.graph.edges.num_vertices;

  const auto golden_graph = normalize(w.graph.edges, Float64Arith{});
  run.num_arcs = golden_graph.num_edges();
  std::vector<AnyGraph> graphs;
  for (const auto& f : w.formats) {
    graphs.push_back(normalize_any(w.graph.edges, f));
    run.format_bits.push_back(format_bits(f));
  }
  run.saturations.assign(w.formats.size(), 0);

  PprConfig golden_cfg;
  golden_cfg.alpha = spec.alpha;
  golden_cfg.max_iter = spec.golden_iterations;
  golden_cfg.kernel = SpmvKernel::kReference;
  golden_cfg.track_convergence = false;
  PprConfig cand_cfg;
  cand_cfg.alpha = spec.alpha;
  cand_cfg.max_iter = spec.iterations;
  cand_cfg.track_convergence = false;

  const std::size_t max_cutoff = *std::max_element(spec.cutoffs.begin(), spec.cutoffs.end());
  if (max_cutoff > run.num_vertices) {
    throw Error(ErrorCode::kCutoffTooLarge, "cutoff exceeds |V|");
  }

  std::vector<std::vector<MetricsRow>> per_batch(w.batches.size());
  std::vector<std::vector<std::uint64_t>> batch_sat(w.batches.size(),
                                                    std::vector<std::uint64_t>(w.formats.size()));
  std::atomic<std::size_t> done{0};
  std::mutex log_mutex;
  parallel_for(w.batches.size(), spec.threads, [&](std::size_t b) {
    const auto& ids = w.batches[b];
    auto golden = run_ppr(golden_graph, golden_cfg, ids);
    std::vector<std::vector<double>> gold_scores;
    std::vector<std::vector<Vertex>> gold_order;
    for (std::uint32_t k = 0; k < golden.ranks.kappa; ++k) {
      gold_scores.push_back(golden.ranks.column(k));
      gold_order.push_back(rank_scores(gold_scores.back(), run.num_vertices));
    }
    const std::uint32_t first_request = static_cast<std::uint32_t>(b * spec.kappa);
    std::vector<MetricsRow> rows(ids.size() * w.formats.size());
    for (std::size_t f = 0; f < w.formats.size(); ++f) {
      BatchOutcome cand = run_batch(graphs[f], cand_cfg, ids);
      batch_sat[b][f] = cand.saturations;
      for (std::size_t k = 0; k < ids.size(); ++k) {
        metrics::RankingPair pair;
        pair.golden_order = gold_order[k];
        pair.golden_scores = gold_scores[k];
        pair.candidate_scores = std::move(cand.columns[k].scores);
        pair.candidate_order = rank_scores(pair.candidate_scores, run.num_vertices);
        MetricsRow& row = rows[k * w.formats.size() + f];
        row.request_id = first_request + static_cast<std::uint32_t>(k);
        row.format_index = f;
        row.format_bits = run.format_bits[f];
        row.report = metrics::evaluate(pair, spec.cutoffs);
      }
    }
    per_batch[b] = std::move(rows);
    const std::size_t finished = ++done;
    std::lock_guard lock(log_mutex);
    log(spec, run.graph + ": batch " + std::to_string(finished) + "/" +
                  std::to_string(w.batches.size()) + " done");
  });
  for (auto& rows : per_batch) {
    for (auto& r : rows) run.rows.push_back(std::move(r));
  }
  for (const auto& s : batch_sat) {
    for (std::size_t f = 0; f < s.size(); ++f) run.saturations[f] += s[f];
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log(spec, run.graph + ": sweep finished in " + fmt("%.1f", secs) + " s");
  return run;
}

inline nlohmann::json provenance(const ExperimentSpec& spec, const Workload& w,
                                 const std::string& command) {
  nlohmann::json j;
  j["command"] = command;
  j["spec"] = to_json(spec);
  j["graph"] = w.graph.provenance;
  j["graph"]["label"] = w.graph.label;
  j["graph"]["num_vertices"] = w.graph.edges.num_vertices;
  j["graph"]["input_arcs"] = w.graph.edges.edges.size();
  j["personalization"] = w.requests;
  j["versions"] = {{"qppr", kVersion}, {"compiler", __VERSION__}, {"cplusplus", __cplusplus}};
  return j;
}

/// Writes metrics.csv, summary.csv and provenance.json into spec.out.
inline RunOutcome cmd_run(const ExperimentSpec& spec) {
  const Workload w = prepare(spec);
  OutputSet out(spec.out);
  RunOutcome run = run_sweep(spec, w);
  out.write_text("metrics.csv", metrics_csv(run, spec));
  out.write_text("summary.csv", summary_csv(run, spec));
  nlohmann::json prov = provenance(spec, w, "run");
  prov["graph"]["normalized_arcs"] = run.num_arcs;
  for (std::size_t f = 0; f < w.formats.size(); ++f) {
    prov["saturation_events"][format_name(w.formats[f])] = run.saturations[f];
  }
  out.write_text("provenance.json", prov.dump(2) + "\n");
  out.commit();
  return run;
}

// --- convergence ------------------------------------------------------------

struct ConvergenceOutcome {
  std::string graph;
  std::vector<int> format_bits;
  /// curves[f][request]: full (untruncated) per-iteration step norms.
  std::vector<std::vector<std::vector<double>>> curves;
};

inline const std::vector<double>& convergence_thresholds() {
  static const std::vector<double> t = {1e-5, 1e-6, 1e-7};
  return t;
}

inline std::string convergence_csv(const ConvergenceOutcome& c) {
  std::ostringstream out;
  out << "graph,format_bits,request_id,iteration,l2_norm\n";
  for (std::size_t f = 0; f < c.curves.size(); ++f) {
    for (std::size_t r = 0; r < c.curves[f].size(); ++r) {
      const auto kept = metrics::truncate_below(c.curves[f][r], kConvergenceFloor);
      for (std::size_t t = 0; t < kept.size(); ++t) {
        out << c.graph << ',' << c.format_bits[f] << ',' << r << ',' << t + 1 << ','
            << fmt("%.6e", kept[t]) << '\n';
      }
    }
  }
  return out.str();
}

struct ThresholdStat {
  std::optional<std::size_t> worst;  // max over requests; empty if any never reached
  double mean = 0.0;                 // over requests that reached it
  std::size_t unreached = 0;
};

inline ThresholdStat threshold_stat(const std::vector<std::vector<double>>& curves,
                                    double threshold) {
  ThresholdStat s;
  std::size_t worst = 0;
  std::vector<double> reached;
  for (const auto& curve : curves) {
    const auto it = metrics::iterations_to_reach(curve, threshold);
    if (!it) {
      ++s.unreached;
      continue;
    }
    worst = std::max(worst, *it);
    reached.push_back(static_cast<double>(*it));
  }
  if (s.unreached == 0) s.worst = worst;
  s.mean = mean(reached);
  return s;
}

inline std::string convergence_summary_csv(const ConvergenceOutcome& c) {
  std::ostringstream out;
  out << "graph,format_bits,threshold,worst_iterations,mean_iterations,unreached\n";
  for (std::size_t f = 0; f < c.curves.size(); ++f) {
    for (double thr : convergence_thresholds()) {
      const ThresholdStat s = threshold_stat(c.curves[f], thr);
      out << c.graph << ',' << c.format_bits[f] << ',' << fmt("%.0e", thr) << ','
          << (s.worst ? std::to_string(*s.worst) : std::string("NA")) << ','
          << fmt("%.3f", s.mean) << ',' << s.unreached << '\n';
    }
  }
  return out.str();
}

inline ConvergenceOutcome run_convergence(const ExperimentSpec& spec, const Workload& w) {
  ConvergenceOutcome c;
  c.graph = w.graph.label;
  PprConfig cfg;
  cfg.alpha = spec.alpha;
  cfg.max_iter = spec.iterations;
  cfg.track_convergence = true;
  for (const auto& f : w.formats) {
    const AnyGraph g = normalize_any(w.graph.edges, f);
    c.format_bits.push_back(format_bits(f));
    std::vector<std::vector<std::vector<double>>> per_batch(w.batches.size());
    parallel_for(w.batches.size(), spec.threads, [&](std::size_t b) {
      BatchOutcome out = run_batch(g, cfg, w.batches[b]);
      for (auto& col : out.columns) per_batch[b].push_back(std::move(col.norms));
    });
    auto& curves = c.curves.emplace_back();
    for (auto& batch : per_batch) {
      for (auto& curve : batch) curves.push_back(std::move(curve));
    }
    log(spec, c.graph + ": convergence for " + format_name(f) + " done");
  }
  return c;
}

/// Writes convergence.csv (curves cut after the first point below 1e-7),
/// convergence_summary.csv and provenance.json.
inline ConvergenceOutcome cmd_convergence(const ExperimentSpec& spec) {
  const Workload w = prepare(spec);
  OutputSet out(spec.out);
  ConvergenceOutcome c = run_convergence(spec, w);
  out.write_text("convergence.csv", convergence_csv(c));
  out.write_text("convergence_summary.csv", convergence_summary_csv(c));
  out.write_text("provenance.json", provenance(spec, w, "convergence").dump(2) + "\n");
  out.commit();
  return c;
}

// --- generate ---------------------------------------------------------------

struct GenerateSpec {
  std::string preset;
  fs::path presets = QPPR_DEFAULT_PRESETS;
  std::optional<std::uint64_t> seed;
  /// 0 stores float64 weights, otherwise raw Q1.f.
  int store_frac_bits = 0;
  fs::path out = "out";
};

struct GenerateOutcome {
  fs::path graph_file;
  fs::path provenance_file;
  std::uint32_t num_vertices = 0;
  std::size_t num_arcs = 0;
};

inline GenerateOutcome cmd_generate(const GenerateSpec& spec) {
  const auto presets = datagen::load_presets(spec.presets);
  datagen::Preset preset = datagen::find_preset(presets, spec.preset);
  if (spec.seed) preset.spec.seed = *spec.seed;
  const EdgeList edges = datagen::generate(preset.spec);

  OutputSet out(spec.out);
  GenerateOutcome result;
  result.graph_file = out.path(spec.preset + ".qcoo");
  result.num_vertices = edges.num_vertices;
  if (spec.store_frac_bits == 0) {
    const auto g = normalize(edges, Float64Arith{});
    result.num_arcs = g.num_edges();
    qcoo::write_file(result.graph_file, g);
  } else {
    const auto g = normalize(edges, FixedArith(spec.store_frac_bits));
    result.num_arcs = g.num_edges();
    qcoo::write_file(result.graph_file, g);
  }
  nlohmann::json prov = {{"command", "generate"},
                         {"preset", spec.preset},
                         {"spec", datagen::to_json(preset.spec)},
                         {"num_vertices", result.num_vertices},
                         {"num_arcs", result.num_arcs},
                         {"stored_frac_bits", spec.store_frac_bits},
                         {"versions", {{"qppr", kVersion}, {"compiler", __VERSION__}}}};
  if (preset.target_arcs) {
    prov["target_arcs"] = *preset.target_arcs;
    prov["relative_deviation"] =
        (static_cast<double>(result.num_arcs) - static_cast<double>(*preset.target_arcs)) /
        static_cast<double>(*preset.target_arcs);
  }
  result.provenance_file = out.path(spec.preset + ".json");
  {
    std::ofstream pf(result.provenance_file, std::ios::trunc);
    pf << prov.dump(2) << '\n';
    if (!pf) throw Error(ErrorCode::kIo, "failed writing provenance");
  }
  out.commit();
  return result;
}

// --- validate ---------------------------------------------------------------

struct ValidateReport {
  Diagnostics diagnostics;
  std::size_t value_mismatches = 0;
  bool spot_check_run = false;
  bool spot_check_ok = true;
  std::string summary;

  bool clean() const { return diagnostics.clean() && spot_check_ok; }
};

namespace detail {

template <class Arith>
bool spot_check(const CooGraph<Arith>& g, std::size_t max_entries, std::uint64_t seed) {
  const std::size_t count = std::min(max_entries, g.num_edges());
  std::vector<Vertex> x(g.x().begin(), g.x().begin() + static_cast<std::ptrdiff_t>(count));
  std::vector<Vertex> y(g.y().begin(), g.y().begin() + static_cast<std::ptrdiff_t>(count));
  std::vector<typename Arith::value_type> val(g.val().begin(),
                                              g.val().begin() + static_cast<std::ptrdiff_t>(count));
  const CooGraph<Arith> sub(g.arith(), g.num_vertices(), std::move(x), std::move(y), std::move(val));

  // Two probability columns with random mass.
  RankBatch<Arith> p(g.arith(), g.num_vertices(), 2);
  Rng rng(seed);
  for (std::uint32_t k = 0; k < 2; ++k) {
    std::vector<double> w(g.num_vertices());
    double total = 0.0;
    for (double& v : w) total += (v = rng.uniform());
    for (Vertex v = 0; v < g.num_vertices(); ++v) p.at(v, k) = g.arith().from_real(w[v] / total);
  }
  SaturationCounter s1, s2;
  const auto streamed = spmv_stream(sub, p, s1);
  const auto reference = spmv_reference(sub, p, s2);
  if constexpr (Arith::kIsFixed) {
    return streamed.values == reference.values;
  } else {
    for (std::size_t i = 0; i < streamed.values.size(); ++i) {
      if (std::fabs(streamed.values[i] - reference.values[i]) > 1e-12) return false;
    }
    return true;
  }
}

template <class Arith>
ValidateReport validate_graph(const CooGraph<Arith>& g) {
  ValidateReport r;
  r.diagnostics = validate(g);
  // Re-derive the weights from the topology and diff them.
  const auto expected = normalize(edge_list_of(g), g.arith());
  if (expected.num_edges() != g.num_edges()) {
    r.diagnostics.issues.push_back({IssueKind::kNormalizationViolation,
                                    "duplicate entries: " + std::to_string(g.num_edges()) +
                                        " stored, " + std::to_string(expected.num_edges()) +
                                        " distinct"});
  } else {
    std::vector<std::uint64_t> degree(g.num_vertices(), 0);
    for (Vertex s : g.y()) ++degree[s];
    for (std::size_t i = 0; i < g.num_edges(); ++i) {
      if (g.val()[i] != g.arith().ratio(1, degree[g.y()[i]])) ++r.value_mismatches;
    }
    if (r.value_mismatches > 0) {
      r.diagnostics.issues.push_back(
          {IssueKind::kNormalizationViolation,
           std::to_string(r.value_mismatches) + " weights differ from 1/outdeg"});
    }
  }
  if (!r.diagnostics.has(IssueKind::kSortViolation)) {
    r.spot_check_run = true;
    r.spot_check_ok = spot_check(g, 1 << 16, 0x5eed);
  }
  return r;
}

}  // namespace detail

/// Throws on unreadable or non-QCOO input; everything else is reported.
inline ValidateReport cmd_validate(const fs::path& path) {
  const qcoo::RawCoo raw = qcoo::read_file(path);
  ValidateReport r = raw.is_fixed() ? detail::validate_graph(qcoo::as_fixed(raw))
                                    : detail::validate_graph(qcoo::as_float64(raw));
  std::ostringstream s;
  s << path.string() << ": |V|=" << raw.num_vertices << " |E|=" << raw.num_edges()
    << " format=" << (raw.is_fixed() ? "Q1." + std::to_string(raw.frac_bits) : "F64") << '\n';
  for (const auto& issue : r.diagnostics.issues) {
    s << "  " << to_string(issue.kind) << ": " << issue.message << '\n';
  }
  if (r.diagnostics.underflow_sources > 0) {
    s << "  warning: " << r.diagnostics.underflow_sources << " sources underflow to zero\n";
  }
  if (r.spot_check_run) {
    s << "  spot check (stream vs reference SpMV): " << (r.spot_check_ok ? "ok" : "MISMATCH")
      << '\n';
  }
  s << (r.clean() ? "clean" : "violations found") << '\n';
  r.summary = s.str();
  return r;
}

}  // namespace qppr::experiment
