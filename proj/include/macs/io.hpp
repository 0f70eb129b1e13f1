#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "macs/graph.hpp"

namespace macs {

struct ParsedGraph {
  Graph graph;
  EdgePartition partition;
  std::vector<long long> original_ids;  // dense id -> original id
  int warnings = 0;                     // skipped unknown tags
};

// Reduces a pose-graph information matrix to a positive scalar weight.
struct WeightRule {
  enum class Kind { Trace, MinEigBlocks, Fixed };
  Kind kind = Kind::Trace;
  double fixed_value = 1.0;

  static WeightRule parse(const std::string& text);
  std::string name() const;
};

struct G2oOptions {
  WeightRule rule;
  bool mark_odometry_fixed = false;  // |u - v| == 1 on original ids -> E^f
};

ParsedGraph parse_edge_list(const std::string& text);
ParsedGraph parse_g2o(const std::string& text, const G2oOptions& opts = {});

enum class InputFormat { EdgeList, G2o };
InputFormat detect_format(const std::string& text);

ParsedGraph parse_graph_file(const std::string& path,
                             const std::string& format = "auto",
                             const G2oOptions& opts = {});

// Writes the chosen edges in edge-list format with original ids restored.
// fixed_marks[i] != 0 writes marker `f` for edges[i], else `c`.
void write_edge_list(std::ostream& os, const Graph& g,
                     const std::vector<int>& edges,
                     const std::vector<char>& fixed_marks,
                     const std::vector<long long>& original_ids);

std::string to_edge_list(const Graph& g, const std::vector<int>& edges,
                         const std::vector<char>& fixed_marks,
                         const std::vector<long long>& original_ids);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace macs
