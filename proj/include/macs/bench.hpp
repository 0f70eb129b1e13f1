#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "macs/frank_wolfe.hpp"
#include "macs/io.hpp"
#include "macs/rounding.hpp"

namespace macs {

// One end-to-end run: parse, pick the backbone, relax, round.
struct RunConfig {
  std::string input;
  std::string format = "auto";  // auto | edgelist | g2o
  WeightRule weight_rule{};
  // none (keep file markers) | odometry | spectral | file:<path>
  std::string backbone = "none";
  bool backbone_counts_against_budget = false;
  StepRule step = StepRule::naive();
  RoundingKind rounding = RoundingKind::Madow;
  long long budget = -1;          // absolute K; wins over the fraction
  double budget_fraction = -1.0;  // in (0,1], of the candidate set
  double epsilon_u = 1e-2;
  int max_iterations = 50;
  double sigma = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 1;
  bool return_last_iterate = false;
  std::string dataset;  // report label, defaults to the input file stem

  // Receives (iteration, L(x_t)) for every evaluated iterate.
  std::function<void(int, const SparseLaplacian&)> laplacian_observer;
};

struct SummaryRow {
  std::string dataset;
  int n = 0;
  long long m = 0;
  long long budget = 0;
  std::string backbone;
  std::string steprule;
  std::string rounding;
  std::string seed;  // integer for raw rows, "mean" / "stddev" aggregated
  double lambda2_rounded = std::numeric_limits<double>::quiet_NaN();
  double lambda2_relaxed = std::numeric_limits<double>::quiet_NaN();
  double dual = std::numeric_limits<double>::quiet_NaN();
  double iters = 0;
  double cum_s = 0.0;
  double avg_iter_s = 0.0;
  bool ok = true;
  std::string error;  // diagnostics only, not a CSV column
};

struct PipelineResult {
  ParsedGraph parsed;  // partition reflects the resolved backbone and budget
  MacResult mac;
  RoundedSelection rounded;
  std::vector<int> selected_edges;  // fixed plus chosen, graph indices
  double lambda2_rounded = 0.0;
  SummaryRow row;
};

PipelineResult run_pipeline(const RunConfig& cfg);

// lambda2 of the subgraph spanned by the given edges over all n nodes;
// zero when the selection is disconnected.
double lambda2_of_selection(const Graph& g, const std::vector<int>& edges,
                            double sigma, std::uint64_t seed);

std::string summary_csv_header();
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows,
                       bool zero_times);

// Runs every config, jobs at a time. Failures come back as rows with
// ok = false; the slot order matches the input order.
std::vector<SummaryRow> run_bench(const std::vector<RunConfig>& rows,
                                  int jobs);

// Mean / stddev rows for every (dataset, K, backbone, steprule, rounding)
// group with at least two successful runs.
std::vector<SummaryRow> aggregate_rows(const std::vector<SummaryRow>& rows);

// Laplacian snapshots for solver replays.
void save_laplacian(const std::string& path, const SparseLaplacian& L);
SparseLaplacian load_laplacian(const std::string& path);

struct ReplayRow {
  std::string file;
  int n = 0;
  long long nonzeros = 0;
  double lambda2 = std::numeric_limits<double>::quiet_NaN();
  double sparse_ms = 0.0;
  double lambda2_dense = std::numeric_limits<double>::quiet_NaN();
  double dense_ms = 0.0;
  bool dense_run = false;
  bool ok = true;
  std::string error;
};

// Re-times the Fiedler solve on saved Laplacians. warmups solves per file
// are discarded before the timed one. with_dense adds a full dense
// eigendecomposition for comparison (skipped above n = 2000).
std::vector<ReplayRow> run_replay(const std::vector<std::string>& files,
                                  bool with_dense, double sigma,
                                  int warmups = 1);
void write_replay_csv(std::ostream& os, const std::vector<ReplayRow>& rows,
                      bool zero_times);

}  // namespace macs
