#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "macs/backbone.hpp"
#include "macs/bench.hpp"
#include "macs/errors.hpp"
#include "macs/fiedler.hpp"
#include "macs/generate.hpp"
#include "macs/graph.hpp"
#include "macs/io.hpp"
#include "macs/laplacian.hpp"

namespace fs = std::filesystem;
using namespace macs;

namespace {

int classify(const std::exception& e) {
  if (dynamic_cast<const NoConvergence*>(&e) ||
      dynamic_cast<const NotPositiveDefinite*>(&e) ||
      dynamic_cast<const ActiveSetOverflow*>(&e))
    return 3;
  return 2;
}

void write_text(const std::string& path, const std::string& text) {
  write_file(path, text);
}

struct SparsifyOpts {
  std::string input;
  std::string format = "auto";
  std::string weight_rule = "trace";
  std::string backbone = "none";
  bool backbone_in_budget = false;
  std::string steprule = "naive";
  std::string rounding = "madow";
  long long budget = -1;
  double budget_frac = -1.0;
  double epsilon = 1e-2;
  int iters = 50;
  double sigma = std::numeric_limits<double>::quiet_NaN();
  std::string out_dir = "macs_out";
  bool save_laplacians = false;
  bool return_last = false;
};

RunConfig to_run_config(const SparsifyOpts& o, std::uint64_t seed) {
  RunConfig cfg;
  cfg.input = o.input;
  cfg.format = o.format;
  cfg.weight_rule = WeightRule::parse(o.weight_rule);
  cfg.backbone = o.backbone;
  cfg.backbone_counts_against_budget = o.backbone_in_budget;
  cfg.step = StepRule::parse(o.steprule);
  cfg.rounding = parse_rounding(o.rounding);
  cfg.budget = o.budget;
  cfg.budget_fraction = o.budget_frac;
  cfg.epsilon_u = o.epsilon;
  cfg.max_iterations = o.iters;
  cfg.sigma = o.sigma;
  cfg.seed = seed;
  cfg.return_last_iterate = o.return_last;
  return cfg;
}

int cmd_sparsify(const SparsifyOpts& opts, std::uint64_t seed, bool det) {
  RunConfig cfg = to_run_config(opts, seed);
  fs::create_directories(opts.out_dir);
  const std::string lap_dir = opts.out_dir + "/laplacians";
  if (opts.save_laplacians) {
    fs::create_directories(lap_dir);
    cfg.laplacian_observer = [&lap_dir](int t, const SparseLaplacian& L) {
      char name[32];
      std::snprintf(name, sizeof name, "/lap_%04d.txt", t);
      save_laplacian(lap_dir + name, L);
    };
  }

  PipelineResult res = run_pipeline(cfg);
  const Graph& g = res.parsed.graph;
  const std::vector<long long>& ids = res.parsed.original_ids;

  std::set<int> fixed_set(res.parsed.partition.fixed.begin(),
                          res.parsed.partition.fixed.end());
  std::vector<char> marks;
  marks.reserve(res.selected_edges.size());
  for (int k : res.selected_edges)
    marks.push_back(fixed_set.count(k) ? 1 : 0);
  {
    std::ostringstream os;
    write_edge_list(os, g, res.selected_edges, marks, ids);
    write_text(opts.out_dir + "/selected_edges.txt", os.str());
  }
  {
    std::ostringstream os;
    os << "edge,u,v,x\n";
    char buf[128];
    const auto& cand = res.parsed.partition.candidate;
    for (int k = 0; k < static_cast<int>(cand.size()); ++k) {
      const WeightedEdge& e = g.edge(cand[k]);
      std::snprintf(buf, sizeof buf, "%d,%lld,%lld,%.12g\n", cand[k],
                    ids[e.u], ids[e.v], res.mac.x_relaxed[k]);
      os << buf;
    }
    write_text(opts.out_dir + "/x_relaxed.csv", os.str());
  }
  {
    std::ostringstream os;
    res.mac.trace.write_csv(os, det);
    write_text(opts.out_dir + "/trace.csv", os.str());
  }
  {
    std::ostringstream os;
    write_summary_csv(os, {res.row}, det);
    write_text(opts.out_dir + "/summary.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "dense,original\n";
    for (int i = 0; i < g.num_nodes(); ++i) os << i << ',' << ids[i] << '\n';
    write_text(opts.out_dir + "/node_ids.csv", os.str());
  }

  const double f = res.mac.pair.lambda2;
  const double gap =
      std::abs(res.mac.u_final - f) / std::max(f, 1e-12);
  std::printf("%s: n=%d m=%d fixed=%zu K=%lld\n", res.row.dataset.c_str(),
              res.row.n, static_cast<int>(res.row.m),
              res.parsed.partition.fixed.size(), res.row.budget);
  std::printf("lambda2_relaxed=%.12g dual=%.12g gap=%.3g iterations=%g\n", f,
              res.mac.u_final, gap, res.row.iters);
  std::printf("lambda2_rounded=%.12g selected=%zu (%s)\n", res.lambda2_rounded,
              res.selected_edges.size(), res.rounded.strategy.c_str());
  std::printf("outputs in %s\n", opts.out_dir.c_str());
  return 0;
}

int cmd_fiedler(const std::string& input, const std::string& format,
                const std::string& rule, double sigma, double tol,
                const std::string& out, std::uint64_t seed) {
  G2oOptions g2o;
  g2o.rule = WeightRule::parse(rule);
  ParsedGraph parsed = parse_graph_file(input, format, g2o);
  FiedlerOptions fo;
  fo.sigma = sigma;
  fo.tol = tol;
  fo.seed = seed;
  const FiedlerPair pair =
      fiedler_shift_invert(build_laplacian(parsed.graph), fo);
  std::printf("lambda2 %.12g\n", pair.lambda2);
  std::string text;
  char buf[64];
  for (int i = 0; i < parsed.graph.num_nodes(); ++i) {
    std::snprintf(buf, sizeof buf, "%lld %.17g\n", parsed.original_ids[i],
                  pair.q2[i]);
    text += buf;
  }
  write_text(out, text);
  std::printf("q2 written to %s\n", out.c_str());
  return 0;
}

int cmd_backbone(const std::string& input, const std::string& format,
                 const std::string& rule, const std::string& policy,
                 const std::string& out) {
  G2oOptions g2o;
  g2o.rule = WeightRule::parse(rule);
  ParsedGraph parsed = parse_graph_file(input, format, g2o);
  std::vector<int> picked;
  if (policy == "spectral") {
    picked = spectral_backbone(parsed.graph);
  } else if (policy == "odometry") {
    picked = odometry_backbone(parsed.graph, parsed.partition.fixed,
                               parsed.original_ids);
  } else {
    throw Error("unknown backbone policy: " + policy);
  }
  std::ostringstream os;
  write_edge_list(os, parsed.graph, picked, std::vector<char>(picked.size(), 1),
                  parsed.original_ids);
  write_text(out, os.str());
  std::printf("%s backbone: %zu edges written to %s\n", policy.c_str(),
              picked.size(), out.c_str());
  return 0;
}

struct GenerateOpts {
  std::string kind;
  int rows = 5, cols = 5;
  int nx = 10, ny = 10, nz = 10;
  int n = 100;
  double radius = 0.15;
  double p = 0.05;
  std::string out = "graph.txt";
};

int cmd_generate(const GenerateOpts& o, std::uint64_t seed) {
  std::unique_ptr<Graph> g;
  if (o.kind == "grid2d") {
    g = std::make_unique<Graph>(make_grid2d(o.rows, o.cols));
  } else if (o.kind == "grid3d") {
    g = std::make_unique<Graph>(make_grid3d(o.nx, o.ny, o.nz));
  } else if (o.kind == "geometric") {
    g = std::make_unique<Graph>(make_geometric(o.n, o.radius, seed));
  } else if (o.kind == "chain-closures") {
    g = std::make_unique<Graph>(make_chain_closures(o.n, o.p, seed));
  } else {
    throw Error("unknown kind: " + o.kind +
                " (grid2d, grid3d, geometric, chain-closures)");
  }
  std::vector<int> all(g->num_edges());
  for (int k = 0; k < g->num_edges(); ++k) all[k] = k;
  std::vector<long long> ids(g->num_nodes());
  for (int i = 0; i < g->num_nodes(); ++i) ids[i] = i;
  std::ostringstream os;
  write_edge_list(os, *g, all, std::vector<char>(all.size(), 0), ids);
  write_text(o.out, os.str());
  std::printf("%s: n=%d m=%d written to %s\n", o.kind.c_str(), g->num_nodes(),
              g->num_edges(), o.out.c_str());
  const ComponentLabels comps = connected_components(*g);
  if (comps.count > 1) {
    std::fprintf(stderr, "generated graph is disconnected (%d components)\n",
                 comps.count);
    return 2;
  }
  return 0;
}

struct BenchOpts {
  std::vector<std::string> inputs;
  std::string format = "auto";
  std::string weight_rule = "trace";
  std::vector<std::string> backbones{"none"};
  bool backbone_in_budget = false;
  std::vector<std::string> steprules{"naive"};
  std::vector<std::string> roundings{"madow"};
  std::vector<long long> budgets;
  std::vector<double> budget_fracs;
  int repeats = 1;
  double epsilon = 1e-2;
  int iters = 50;
  double sigma = std::numeric_limits<double>::quiet_NaN();
  bool return_last = false;
  std::string out = "bench_report.csv";
  std::vector<std::string> replay;
  bool dense = false;
  int warmups = 1;
};

int cmd_bench(const BenchOpts& o, std::uint64_t seed, int jobs, bool det) {
  if (!o.replay.empty()) {
    const std::vector<ReplayRow> rows =
        run_replay(o.replay, o.dense, o.sigma, o.warmups);
    std::ostringstream os;
    write_replay_csv(os, rows, det);
    write_text(o.out, os.str());
    int failed = 0;
    double speedup_sum = 0.0;
    int speedup_n = 0;
    for (const ReplayRow& r : rows) {
      if (!r.ok) {
        ++failed;
        std::fprintf(stderr, "replay %s failed: %s\n", r.file.c_str(),
                     r.error.c_str());
        continue;
      }
      if (r.dense_run && r.sparse_ms > 0.0) {
        speedup_sum += r.dense_ms / r.sparse_ms;
        ++speedup_n;
      }
    }
    std::printf("replayed %zu Laplacians, %d failed, report in %s\n",
                rows.size(), failed, o.out.c_str());
    if (speedup_n > 0)
      std::printf("mean dense/sparse time ratio %.1fx over %d solves\n",
                  speedup_sum / speedup_n, speedup_n);
    return failed > 0 ? 4 : 0;
  }

  if (o.inputs.empty()) throw Error("bench needs --input or --replay");
  if (!o.budgets.empty() && !o.budget_fracs.empty())
    throw Error("use either --budget or --budget-frac, not both");
  if (o.budgets.empty() && o.budget_fracs.empty())
    throw Error("bench needs --budget or --budget-frac");
  if (o.repeats < 1) throw Error("--repeats must be positive");

  std::vector<RunConfig> grid;
  for (const std::string& input : o.inputs) {
    for (const std::string& backbone : o.backbones) {
      for (const std::string& step : o.steprules) {
        for (const std::string& rounding : o.roundings) {
          const std::size_t nb =
              o.budgets.empty() ? o.budget_fracs.size() : o.budgets.size();
          for (std::size_t b = 0; b < nb; ++b) {
            for (int rep = 0; rep < o.repeats; ++rep) {
              RunConfig cfg;
              cfg.input = input;
              cfg.format = o.format;
              cfg.weight_rule = WeightRule::parse(o.weight_rule);
              cfg.backbone = backbone;
              cfg.backbone_counts_against_budget = o.backbone_in_budget;
              cfg.step = StepRule::parse(step);
              cfg.rounding = parse_rounding(rounding);
              if (o.budgets.empty())
                cfg.budget_fraction = o.budget_fracs[b];
              else
                cfg.budget = o.budgets[b];
              cfg.epsilon_u = o.epsilon;
              cfg.max_iterations = o.iters;
              cfg.sigma = o.sigma;
              cfg.seed = seed + static_cast<std::uint64_t>(rep);
              cfg.return_last_iterate = o.return_last;
              grid.push_back(std::move(cfg));
            }
          }
        }
      }
    }
  }

  std::vector<SummaryRow> rows = run_bench(grid, jobs);
  int failed = 0;
  for (const SummaryRow& r : rows) {
    if (r.ok) continue;
    ++failed;
    std::fprintf(stderr, "bench row %s/%s/%s/%s seed=%s failed: %s\n",
                 r.dataset.c_str(), r.backbone.c_str(), r.steprule.c_str(),
                 r.rounding.c_str(), r.seed.c_str(), r.error.c_str());
  }
  const std::vector<SummaryRow> agg = aggregate_rows(rows);
  rows.insert(rows.end(), agg.begin(), agg.end());
  std::ostringstream os;
  write_summary_csv(os, rows, det);
  write_text(o.out, os.str());
  std::printf("%zu runs (%d failed), %zu aggregate rows, report in %s\n",
              rows.size() - agg.size(), failed, agg.size(), o.out.c_str());
  return failed > 0 ? 4 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maximum-algebraic-connectivity graph sparsification"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 1;
  int jobs = 0;
  bool det = false;
  app.add_option("--seed", seed, "base RNG seed")->capture_default_str();
  app.add_option("--jobs", jobs, "worker threads, 0 for all cores")
      ->capture_default_str();
  app.add_flag("--deterministic-output", det,
               "zero wall-clock columns in CSV outputs");
  app.set_config("--config", "",
                 "key=value config file; [sparsify] and [bench] sections "
                 "set subcommand options");

  SparsifyOpts sp;
  CLI::App* sparsify =
      app.add_subcommand("sparsify", "select a K-edge subgraph");
  sparsify->add_option("--input", sp.input, "graph file")->required();
  sparsify->add_option("--format", sp.format, "auto | edgelist | g2o");
  sparsify->add_option("--weight-rule", sp.weight_rule,
                       "trace | min-eig-2x2-rot | fixed:<w>");
  sparsify->add_option("--backbone", sp.backbone,
                       "none | odometry | spectral | file:<path>");
  sparsify->add_flag("--backbone-in-budget", sp.backbone_in_budget,
                     "fixed edges count against K");
  sparsify->add_option("--steprule", sp.steprule,
                       "naive | exact | backtracking | pfw-exact");
  sparsify->add_option("--rounding", sp.rounding,
                       "madow | topk | mst | mst-madow");
  sparsify->add_option("--budget", sp.budget, "candidate edges to keep");
  sparsify->add_option("--budget-frac", sp.budget_frac,
                       "budget as a fraction in (0,1]");
  sparsify->add_option("--epsilon", sp.epsilon, "duality gap tolerance")
      ->capture_default_str();
  sparsify->add_option("--iters", sp.iters, "iteration cap")
      ->capture_default_str();
  sparsify->add_option("--sigma", sp.sigma, "shift (default automatic)");
  sparsify->add_option("--out-dir", sp.out_dir, "output directory")
      ->capture_default_str();
  sparsify->add_flag("--save-laplacians", sp.save_laplacians,
                     "dump L(x_t) per iteration for replay");
  sparsify->add_flag("--return-last", sp.return_last,
                     "return the final iterate, not the best one");

  std::string fi_input, fi_format = "auto", fi_rule = "trace",
              fi_out = "q2.txt";
  double fi_sigma = std::numeric_limits<double>::quiet_NaN();
  double fi_tol = 1e-10;
  CLI::App* fiedler =
      app.add_subcommand("fiedler", "algebraic connectivity of one graph");
  fiedler->add_option("--input", fi_input, "graph file")->required();
  fiedler->add_option("--format", fi_format, "auto | edgelist | g2o");
  fiedler->add_option("--weight-rule", fi_rule,
                      "trace | min-eig-2x2-rot | fixed:<w>");
  fiedler->add_option("--sigma", fi_sigma, "shift (default automatic)");
  fiedler->add_option("--tol", fi_tol, "eigenpair tolerance")
      ->capture_default_str();
  fiedler->add_option("-o,--output", fi_out, "q2 output file")
      ->capture_default_str();

  std::string bb_input, bb_format = "auto", bb_rule = "trace",
              bb_policy = "spectral", bb_out = "backbone.txt";
  CLI::App* backbone =
      app.add_subcommand("backbone", "extract a fixed spanning backbone");
  backbone->add_option("--input", bb_input, "graph file")->required();
  backbone->add_option("--format", bb_format, "auto | edgelist | g2o");
  backbone->add_option("--weight-rule", bb_rule,
                       "trace | min-eig-2x2-rot | fixed:<w>");
  backbone->add_option("--policy", bb_policy, "spectral | odometry")
      ->capture_default_str();
  backbone->add_option("-o,--output", bb_out, "backbone edge list")
      ->capture_default_str();

  BenchOpts be;
  CLI::App* bench =
      app.add_subcommand("bench", "run a benchmark matrix or a replay");
  bench->add_option("--input", be.inputs, "graph files");
  bench->add_option("--format", be.format, "auto | edgelist | g2o");
  bench->add_option("--weight-rule", be.weight_rule,
                    "trace | min-eig-2x2-rot | fixed:<w>");
  bench->add_option("--backbone", be.backbones,
                    "backbone policies to sweep");
  bench->add_flag("--backbone-in-budget", be.backbone_in_budget,
                  "fixed edges count against K");
  bench->add_option("--steprule", be.steprules, "step rules to sweep");
  bench->add_option("--rounding", be.roundings, "rounding strategies");
  bench->add_option("--budget", be.budgets, "absolute budgets to sweep");
  bench->add_option("--budget-frac", be.budget_fracs,
                    "budget fractions to sweep");
  bench->add_option("--repeats", be.repeats, "seeds per configuration")
      ->capture_default_str();
  bench->add_option("--epsilon", be.epsilon, "duality gap tolerance")
      ->capture_default_str();
  bench->add_option("--iters", be.iters, "iteration cap")
      ->capture_default_str();
  bench->add_option("--sigma", be.sigma, "shift (default automatic)");
  bench->add_flag("--return-last", be.return_last,
                  "return final iterates, not best ones");
  bench->add_option("-o,--output", be.out, "report CSV")
      ->capture_default_str();
  bench->add_option("--replay", be.replay, "saved Laplacian files to re-time");
  bench->add_flag("--dense", be.dense, "also time a dense eigensolve");
  bench->add_option("--warmups", be.warmups, "discarded solves per replay")
      ->capture_default_str();

  GenerateOpts ge;
  CLI::App* generate =
      app.add_subcommand("generate", "write a synthetic graph");
  generate->add_option("--kind", ge.kind,
                       "grid2d | grid3d | geometric | chain-closures")
      ->required();
  generate->add_option("--rows", ge.rows, "grid2d rows")
      ->capture_default_str();
  generate->add_option("--cols", ge.cols, "grid2d cols")
      ->capture_default_str();
  generate->add_option("--nx", ge.nx, "grid3d x")->capture_default_str();
  generate->add_option("--ny", ge.ny, "grid3d y")->capture_default_str();
  generate->add_option("--nz", ge.nz, "grid3d z")->capture_default_str();
  generate->add_option("-n,--nodes", ge.n, "node count")
      ->capture_default_str();
  generate->add_option("--radius", ge.radius, "geometric radius")
      ->capture_default_str();
  generate->add_option("-p,--closure-prob", ge.p, "loop closure probability")
      ->capture_default_str();
  generate->add_option("-o,--output", ge.out, "output edge list")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (sparsify->parsed()) return cmd_sparsify(sp, seed, det);
    if (fiedler->parsed())
      return cmd_fiedler(fi_input, fi_format, fi_rule, fi_sigma, fi_tol,
                         fi_out, seed);
    if (backbone->parsed())
      return cmd_backbone(bb_input, bb_format, bb_rule, bb_policy, bb_out);
    if (bench->parsed()) return cmd_bench(be, seed, jobs, det);
    if (generate->parsed()) return cmd_generate(ge, seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return classify(e);
  }
  return 2;
}
