#include "macs/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>
#include <utility>

#include "macs/backbone.hpp"
#include "macs/errors.hpp"
#include "macs/fiedler.hpp"
#include "macs/laplacian.hpp"

namespace macs {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

std::string path_stem(const std::string& path) {
  const std::string stem = std::filesystem::path(path).stem().string();
  return stem.empty() ? path : stem;
}

bool starts_with(const std::string& s, const char* prefix) {
  return s.rfind(prefix, 0) == 0;
}

// Maps the edges of a backbone file onto graph edge indices through the
// original node ids.
std::vector<int> backbone_from_file(const std::string& path,
                                    const ParsedGraph& parsed) {
  const ParsedGraph bb = parse_edge_list(read_file(path));
  std::map<std::pair<long long, long long>, int> index;
  const Graph& g = parsed.graph;
  for (int k = 0; k < g.num_edges(); ++k) {
    const WeightedEdge& e = g.edge(k);
    long long a = parsed.original_ids[e.u];
    long long b = parsed.original_ids[e.v];
    if (a > b) std::swap(a, b);
    index[{a, b}] = k;
  }
  std::vector<int> fixed;
  for (int k = 0; k < bb.graph.num_edges(); ++k) {
    const WeightedEdge& e = bb.graph.edge(k);
    long long a = bb.original_ids[e.u];
    long long b = bb.original_ids[e.v];
    if (a > b) std::swap(a, b);
    auto it = index.find({a, b});
    if (it == index.end())
      throw Error("backbone edge " + std::to_string(a) + " " +
                  std::to_string(b) + " is not in the graph");
    fixed.push_back(it->second);
  }
  std::sort(fixed.begin(), fixed.end());
  fixed.erase(std::unique(fixed.begin(), fixed.end()), fixed.end());
  return fixed;
}

std::vector<int> resolve_backbone(const RunConfig& cfg,
                                  const ParsedGraph& parsed) {
  if (cfg.backbone == "none") return parsed.partition.fixed;
  if (cfg.backbone == "odometry")
    return odometry_backbone(parsed.graph, parsed.partition.fixed,
                             parsed.original_ids);
  if (cfg.backbone == "spectral") return spectral_backbone(parsed.graph);
  if (starts_with(cfg.backbone, "file:"))
    return backbone_from_file(cfg.backbone.substr(5), parsed);
  throw Error("unknown backbone policy: " + cfg.backbone);
}

long long resolve_budget(const RunConfig& cfg, long long num_candidates,
                         long long num_fixed) {
  long long K;
  if (cfg.budget >= 0) {
    K = cfg.budget;
  } else {
    if (!(cfg.budget_fraction > 0.0) || cfg.budget_fraction > 1.0)
      throw InfeasibleBudget(
          "need a budget: an absolute K or a fraction in (0,1]");
    K = std::llround(cfg.budget_fraction * static_cast<double>(num_candidates));
  }
  if (cfg.backbone_counts_against_budget) K -= num_fixed;
  if (K < 0 || K > num_candidates)
    throw InfeasibleBudget("budget " + std::to_string(K) + " outside [0, " +
                           std::to_string(num_candidates) + "]");
  return K;
}

}  // namespace

double lambda2_of_selection(const Graph& g, const std::vector<int>& edges,
                            double sigma, std::uint64_t seed) {
  if (g.num_nodes() < 2) return 0.0;
  if (connected_components(g, edges).count > 1) return 0.0;
  std::vector<WeightedEdge> sel;
  sel.reserve(edges.size());
  for (int k : edges) sel.push_back(g.edge(k));
  Graph sub(g.num_nodes(), std::move(sel));
  FiedlerOptions fo;
  fo.sigma = sigma;
  fo.seed = seed ^ 0x6a09e667f3bcc909ULL;
  return fiedler_shift_invert(build_laplacian(sub), fo).lambda2;
}

PipelineResult run_pipeline(const RunConfig& cfg) {
  ParsedGraph parsed =
      parse_graph_file(cfg.input, cfg.format, G2oOptions{cfg.weight_rule});
  const Graph& g = parsed.graph;

  std::vector<int> fixed = resolve_backbone(cfg, parsed);
  const long long mc = g.num_edges() - static_cast<long long>(fixed.size());
  const long long K =
      resolve_budget(cfg, mc, static_cast<long long>(fixed.size()));
  if (cfg.rounding == RoundingKind::Mst ||
      cfg.rounding == RoundingKind::MstMadow) {
    const int needed = connected_components(g, fixed).count - 1;
    if (K < needed)
      throw BudgetTooSmall("budget " + std::to_string(K) +
                           " cannot connect the graph; a spanning tree needs " +
                           std::to_string(needed) + " candidate edges");
  }
  parsed.partition = make_partition(g, fixed, static_cast<int>(K));

  MacProblem problem = MacProblem::from_graph(g, parsed.partition);
  problem.epsilon_u = cfg.epsilon_u;
  problem.max_iterations = cfg.max_iterations;
  problem.fiedler.sigma = cfg.sigma;
  problem.fiedler.seed = cfg.seed ^ 0x9e3779b97f4a7c15ULL;
  problem.return_last_iterate = cfg.return_last_iterate;
  if (cfg.laplacian_observer) {
    auto assembler = std::make_shared<LaplacianAssembler>(
        problem.fixed_laplacian, problem.n(), problem.candidate_edges);
    auto sink = cfg.laplacian_observer;
    problem.iterate_observer = [assembler,
                                sink](int t, const Eigen::VectorXd& x) {
      sink(t, assembler->assemble(x));
    };
  }

  const auto t0 = std::chrono::steady_clock::now();
  MacResult mac = solve_mac(problem, cfg.step);
  const double cum_s = elapsed_ms(t0) / 1000.0;

  RoundedSelection rounded =
      round_selection(cfg.rounding, g, parsed.partition.fixed,
                      parsed.partition.candidate, mac.x_relaxed,
                      static_cast<int>(K), cfg.seed);
  mac.x_rounded = Eigen::VectorXd::Zero(mac.x_relaxed.size());
  for (int k : rounded.chosen) mac.x_rounded[k] = 1.0;

  std::vector<int> selected = parsed.partition.fixed;
  for (int k : rounded.chosen)
    selected.push_back(parsed.partition.candidate[k]);
  std::sort(selected.begin(), selected.end());

  const double l2r = lambda2_of_selection(g, selected, cfg.sigma, cfg.seed);
  if (l2r > mac.u_final + 1e-6)
    throw Error("rounded objective " + std::to_string(l2r) +
                " exceeds the dual bound " + std::to_string(mac.u_final));

  SummaryRow row;
  row.dataset = cfg.dataset.empty() ? path_stem(cfg.input) : cfg.dataset;
  row.n = g.num_nodes();
  row.m = g.num_edges();
  row.budget = K;
  row.backbone = cfg.backbone;
  row.steprule = cfg.step.name();
  row.rounding = rounding_name(cfg.rounding);
  row.seed = std::to_string(cfg.seed);
  row.lambda2_rounded = l2r;
  row.lambda2_relaxed = mac.pair.lambda2;
  row.dual = mac.u_final;
  row.iters = mac.iterations;
  row.cum_s = cum_s;
  row.avg_iter_s = cum_s / std::max(1.0, static_cast<double>(mac.iterations));

  return PipelineResult{std::move(parsed), std::move(mac), std::move(rounded),
                        std::move(selected), l2r, std::move(row)};
}

std::string summary_csv_header() {
  return "dataset,n,m,K,backbone,steprule,rounding,seed,lambda2_rounded,"
         "lambda2_relaxed,dual,iters,cum_s,avg_iter_s";
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows,
                       bool zero_times) {
  os << summary_csv_header() << '\n';
  char buf[256];
  for (const SummaryRow& r : rows) {
    os << r.dataset << ',' << r.n << ',' << r.m << ',' << r.budget << ','
       << r.backbone << ',' << r.steprule << ',' << r.rounding << ','
       << r.seed << ',';
    if (!r.ok) {
      os << ",,,,,\n";
      continue;
    }
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%g,%.6f,%.6f",
                  r.lambda2_rounded, r.lambda2_relaxed, r.dual, r.iters,
                  zero_times ? 0.0 : r.cum_s, zero_times ? 0.0 : r.avg_iter_s);
    os << buf << '\n';
  }
}

namespace {

SummaryRow run_row(const RunConfig& cfg) {
  try {
    return run_pipeline(cfg).row;
  } catch (const std::exception& e) {
    SummaryRow r;
    r.dataset = cfg.dataset.empty() ? path_stem(cfg.input) : cfg.dataset;
    r.budget = cfg.budget;
    r.backbone = cfg.backbone;
    r.steprule = cfg.step.name();
    r.rounding = rounding_name(cfg.rounding);
    r.seed = std::to_string(cfg.seed);
    r.ok = false;
    r.error = e.what();
    return r;
  }
}

}  // namespace

std::vector<SummaryRow> run_bench(const std::vector<RunConfig>& rows,
                                  int jobs) {
  std::vector<SummaryRow> out(rows.size());
  if (rows.empty()) return out;
  int nthreads = jobs > 0
                     ? jobs
                     : static_cast<int>(std::max(
                           1u, std::thread::hardware_concurrency()));
  nthreads = std::min<int>(nthreads, static_cast<int>(rows.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&rows, &out, &next] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= rows.size()) break;
      out[i] = run_row(rows[i]);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nthreads - 1);
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(work);
  work();
  for (std::thread& th : pool) th.join();
  return out;
}

std::vector<SummaryRow> aggregate_rows(const std::vector<SummaryRow>& rows) {
  using Key =
      std::tuple<std::string, long long, std::string, std::string,
                 std::string>;
  std::map<Key, std::vector<const SummaryRow*>> groups;
  std::vector<Key> order;
  for (const SummaryRow& r : rows) {
    if (!r.ok) continue;
    Key key{r.dataset, r.budget, r.backbone, r.steprule, r.rounding};
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (const Key& key : order) {
    const auto& members = groups[key];
    if (members.size() < 2) continue;
    const double nm = static_cast<double>(members.size());
    auto stats = [&](auto field) {
      double mean = 0.0;
      for (const SummaryRow* r : members) mean += field(*r);
      mean /= nm;
      double var = 0.0;
      for (const SummaryRow* r : members) {
        const double d = field(*r) - mean;
        var += d * d;
      }
      return std::pair<double, double>{mean, std::sqrt(var / (nm - 1.0))};
    };
    const auto l2r = stats([](const SummaryRow& r) { return r.lambda2_rounded; });
    const auto l2x = stats([](const SummaryRow& r) { return r.lambda2_relaxed; });
    const auto du = stats([](const SummaryRow& r) { return r.dual; });
    const auto it = stats([](const SummaryRow& r) { return r.iters; });
    const auto cs = stats([](const SummaryRow& r) { return r.cum_s; });
    const auto as = stats([](const SummaryRow& r) { return r.avg_iter_s; });

    SummaryRow base = *members.front();
    base.seed = "mean";
    base.lambda2_rounded = l2r.first;
    base.lambda2_relaxed = l2x.first;
    base.dual = du.first;
    base.iters = it.first;
    base.cum_s = cs.first;
    base.avg_iter_s = as.first;
    out.push_back(base);
    base.seed = "stddev";
    base.lambda2_rounded = l2r.second;
    base.lambda2_relaxed = l2x.second;
    base.dual = du.second;
    base.iters = it.second;
    base.cum_s = cs.second;
    base.avg_iter_s = as.second;
    out.push_back(base);
  }
  return out;
}

void save_laplacian(const std::string& path, const SparseLaplacian& L) {
  SparseLaplacian C = L;
  C.makeCompressed();
  std::string text;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d %lld\n", static_cast<int>(C.rows()),
                static_cast<long long>(C.nonZeros()));
  text += buf;
  for (int col = 0; col < C.outerSize(); ++col) {
    for (SparseLaplacian::InnerIterator it(C, col); it; ++it) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n",
                    static_cast<int>(it.row()), static_cast<int>(it.col()),
                    it.value());
      text += buf;
    }
  }
  write_file(path, text);
}

SparseLaplacian load_laplacian(const std::string& path) {
  std::istringstream in(read_file(path));
  int n = 0;
  long long nnz = 0;
  if (!(in >> n >> nnz) || n < 1 || nnz < 0)
    throw ParseError(1, "bad Laplacian header in " + path);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(nnz);
  for (long long k = 0; k < nnz; ++k) {
    int i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v))
      throw ParseError(static_cast<int>(k + 2),
                       "truncated Laplacian file " + path);
    if (i < 0 || i >= n || j < 0 || j >= n || !std::isfinite(v))
      throw ParseError(static_cast<int>(k + 2),
                       "bad Laplacian entry in " + path);
    trips.emplace_back(i, j, v);
  }
  SparseLaplacian L(n, n);
  L.setFromTriplets(trips.begin(), trips.end());
  L.makeCompressed();
  return L;
}

std::vector<ReplayRow> run_replay(const std::vector<std::string>& files,
                                  bool with_dense, double sigma,
                                  int warmups) {
  std::vector<ReplayRow> rows;
  rows.reserve(files.size());
  for (const std::string& file : files) {
    ReplayRow r;
    r.file = file;
    try {
      const SparseLaplacian L = load_laplacian(file);
      r.n = static_cast<int>(L.rows());
      r.nonzeros = L.nonZeros();
      FiedlerOptions fo;
      fo.sigma = sigma;
      FiedlerSolver solver(L, fo);
      for (int w = 0; w < warmups; ++w) solver.solve(L);
      auto t0 = std::chrono::steady_clock::now();
      const FiedlerPair pair = solver.solve(L);
      r.sparse_ms = elapsed_ms(t0);
      r.lambda2 = pair.lambda2;
      if (with_dense && r.n <= 2000) {
        const Eigen::MatrixXd D(L);
        t0 = std::chrono::steady_clock::now();
        const FiedlerPair dp = fiedler_dense_oracle(D);
        r.dense_ms = elapsed_ms(t0);
        r.lambda2_dense = dp.lambda2;
        r.dense_run = true;
      }
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_replay_csv(std::ostream& os, const std::vector<ReplayRow>& rows,
                      bool zero_times) {
  os << "file,n,nnz,lambda2,sparse_ms,lambda2_dense,dense_ms\n";
  char buf[160];
  for (const ReplayRow& r : rows) {
    os << r.file << ',' << r.n << ',' << r.nonzeros << ',';
    if (!r.ok) {
      os << ",,,\n";
      continue;
    }
    std::snprintf(buf, sizeof buf, "%.12g,%.3f", r.lambda2,
                  zero_times ? 0.0 : r.sparse_ms);
    os << buf << ',';
    if (r.dense_run) {
      std::snprintf(buf, sizeof buf, "%.12g,%.3f", r.lambda2_dense,
                    zero_times ? 0.0 : r.dense_ms);
      os << buf;
    } else {
      os << ',';
    }
    os << '\n';
  }
}

}  // namespace macs
