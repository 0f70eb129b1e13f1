#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "macs/io.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

// Runs the CLI inside dir and captures exit code plus both streams.
RunResult run_cli(const fs::path& dir, const std::string& args) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = "cd " + dir.string() + " && " + MACS_CLI_PATH + " " +
                          args + " > stdout.txt 2> stderr.txt";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("macs_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("generate writes parseable graphs of the right size") {
  const fs::path dir = fresh_dir("generate");
  RunResult r = run_cli(dir, "generate --kind grid2d --rows 5 --cols 5");
  CHECK(r.code == 0);
  const macs::ParsedGraph p =
      macs::parse_graph_file((dir / "graph.txt").string());
  CHECK(p.graph.num_nodes() == 25);
  CHECK(p.graph.num_edges() == 40);

  r = run_cli(dir, "generate --kind chain-closures -n 30 -p 0.1 -o chain.txt");
  CHECK(r.code == 0);
  CHECK(macs::parse_graph_file((dir / "chain.txt").string())
            .graph.num_nodes() == 30);

  // sparse geometric graphs come out disconnected: flagged, exit 2
  r = run_cli(dir, "generate --kind geometric -n 40 --radius 0.01 -o geo.txt");
  CHECK(r.code == 2);
  CHECK(r.err.find("disconnected") != std::string::npos);
  CHECK(fs::exists(dir / "geo.txt"));  // the file is still written

  r = run_cli(dir, "generate --kind moebius");
  CHECK(r.code == 2);
}

TEST_CASE("fiedler prints lambda2 and writes the vector") {
  const fs::path dir = fresh_dir("fiedler");
  REQUIRE(run_cli(dir, "generate --kind grid2d --rows 5 --cols 5").code == 0);
  const RunResult r = run_cli(dir, "fiedler --input graph.txt");
  CHECK(r.code == 0);
  CHECK(r.out.find("lambda2 0.38196601125") != std::string::npos);
  CHECK(count_lines(macs::read_file((dir / "q2.txt").string())) == 25);
}

TEST_CASE("sparsify writes the full output bundle") {
  const fs::path dir = fresh_dir("sparsify");
  REQUIRE(run_cli(dir, "generate --kind grid2d --rows 4 --cols 5").code == 0);
  const RunResult r = run_cli(
      dir,
      "sparsify --input graph.txt --budget 25 --rounding mst "
      "--steprule naive --iters 8 --out-dir out --save-laplacians");
  CHECK(r.code == 0);
  for (const char* name :
       {"selected_edges.txt", "x_relaxed.csv", "trace.csv", "summary.csv",
        "node_ids.csv"})
    CHECK(fs::exists(dir / "out" / name));

  const macs::ParsedGraph sel =
      macs::parse_graph_file((dir / "out" / "selected_edges.txt").string());
  CHECK(sel.graph.num_edges() == 25);

  const std::string summary =
      macs::read_file((dir / "out" / "summary.csv").string());
  CHECK(summary.rfind("dataset,n,m,K,backbone,steprule,rounding,seed,", 0) ==
        0);
  CHECK(summary.find("graph,20,31,25,none,naive,mst,1,") != std::string::npos);

  // --save-laplacians dumps one snapshot per evaluated iterate
  int laps = 0;
  for (auto& entry : fs::directory_iterator(dir / "out" / "laplacians"))
    laps += entry.is_regular_file() ? 1 : 0;
  CHECK(laps >= 8);
}

TEST_CASE("sparsify exit codes distinguish input from solver trouble") {
  const fs::path dir = fresh_dir("exits");
  CHECK(run_cli(dir, "sparsify --input missing.txt --budget 3").code == 2);
  CHECK(run_cli(dir, "sparsify").code == 2);  // missing required flag

  macs::write_file((dir / "two.txt").string(), "0 1 1\n2 3 1\n");
  CHECK(run_cli(dir, "sparsify --input two.txt --budget 1").code == 2);
  CHECK(run_cli(dir, "fiedler --input two.txt").code == 2);

  macs::write_file((dir / "bad.txt").string(), "0 1 noweight\n");
  const RunResult r = run_cli(dir, "fiedler --input bad.txt");
  CHECK(r.code == 2);
  CHECK(r.err.find("line 1") != std::string::npos);

  REQUIRE(run_cli(dir, "generate --kind grid2d --rows 3 --cols 3").code == 0);
  CHECK(run_cli(dir, "sparsify --input graph.txt --budget 3 --steprule sgd")
            .code == 2);
  CHECK(run_cli(dir, "sparsify --input graph.txt --budget 99").code == 2);
  CHECK(run_cli(dir, "sparsify --input graph.txt").code == 2);  // no budget
}

TEST_CASE("config files feed flags and the command line overrides them") {
  const fs::path dir = fresh_dir("config");
  REQUIRE(run_cli(dir, "generate --kind grid2d --rows 4 --cols 4").code == 0);
  macs::write_file((dir / "job.cfg").string(),
                   "seed=9\n"
                   "[sparsify]\n"
                   "input=graph.txt\n"
                   "budget=12\n"
                   "steprule=exact\n"
                   "rounding=topk\n"
                   "iters=5\n");
  RunResult r = run_cli(dir, "sparsify --config job.cfg");
  CHECK(r.code == 0);
  std::string summary = macs::read_file((dir / "macs_out/summary.csv").string());
  CHECK(summary.find(",exact,topk,") != std::string::npos);

  r = run_cli(dir, "sparsify --config job.cfg --steprule naive --out-dir o2");
  CHECK(r.code == 0);
  summary = macs::read_file((dir / "o2/summary.csv").string());
  CHECK(summary.find(",naive,topk,") != std::string::npos);
}

TEST_CASE("backbone subcommand emits a spanning fixed set") {
  const fs::path dir = fresh_dir("backbone");
  REQUIRE(run_cli(dir, "generate --kind chain-closures -n 25 -p 0.15").code ==
          0);
  RunResult r = run_cli(dir, "backbone --input graph.txt --policy spectral");
  CHECK(r.code == 0);
  const macs::ParsedGraph bb =
      macs::parse_graph_file((dir / "backbone.txt").string());
  CHECK(bb.graph.num_edges() == 24);
  CHECK(static_cast<int>(bb.partition.fixed.size()) == 24);

  r = run_cli(dir, "backbone --input graph.txt --policy odometry -o odo.txt");
  CHECK(r.code == 0);
  CHECK(run_cli(dir, "backbone --input graph.txt --policy phantom").code == 2);

  // feed the file back as a fixed backbone for sparsify
  r = run_cli(dir,
              "sparsify --input graph.txt --backbone file:backbone.txt "
              "--budget 10 --iters 5 --out-dir out");
  CHECK(r.code == 0);
  const std::string summary =
      macs::read_file((dir / "out/summary.csv").string());
  CHECK(summary.find("file:backbone.txt") != std::string::npos);
}

TEST_CASE("bench sweeps a matrix and aggregates repeats") {
  const fs::path dir = fresh_dir("bench");
  REQUIRE(run_cli(dir, "generate --kind chain-closures -n 20 -p 0.2").code ==
          0);
  const RunResult r = run_cli(
      dir,
      "bench --input graph.txt --steprule naive exact --rounding madow "
      "--budget-frac 0.6 --repeats 3 --iters 6 --jobs 2 -o report.csv");
  CHECK(r.code == 0);
  const std::string report = macs::read_file((dir / "report.csv").string());
  // 6 raw rows + 2 groups x (mean + stddev) + header
  CHECK(count_lines(report) == 1 + 6 + 4);
  CHECK(report.find(",mean,") != std::string::npos);
  CHECK(report.find(",stddev,") != std::string::npos);
}

TEST_CASE("bench replays saved laplacians") {
  const fs::path dir = fresh_dir("replay");
  REQUIRE(run_cli(dir, "generate --kind grid2d --rows 5 --cols 6").code == 0);
  REQUIRE(run_cli(dir,
                  "sparsify --input graph.txt --budget 40 --iters 4 "
                  "--out-dir out --save-laplacians")
              .code == 0);
  const RunResult r = run_cli(
      dir, "bench --replay out/laplacians/lap_000*.txt --dense -o replay.csv");
  CHECK(r.code == 0);
  const std::string report = macs::read_file((dir / "replay.csv").string());
  CHECK(report.rfind("file,n,nnz,lambda2,sparse_ms,lambda2_dense,dense_ms",
                     0) == 0);
  CHECK(count_lines(report) >= 4);
}

TEST_CASE("identical seeds give byte-identical outputs") {
  const fs::path dir = fresh_dir("determinism");
  REQUIRE(run_cli(dir, "generate --kind chain-closures -n 18 -p 0.25").code ==
          0);
  const std::string args =
      "--seed 42 --deterministic-output sparsify --input graph.txt "
      "--budget-frac 0.5 --rounding mst-madow --iters 6 --out-dir ";
  REQUIRE(run_cli(dir, args + "a").code == 0);
  REQUIRE(run_cli(dir, args + "b").code == 0);
  for (const char* name :
       {"selected_edges.txt", "x_relaxed.csv", "trace.csv", "summary.csv"}) {
    CHECK(macs::read_file((dir / "a" / name).string()) ==
          macs::read_file((dir / "b" / name).string()));
  }
}
