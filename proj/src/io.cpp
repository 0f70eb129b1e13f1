#include "macs/io.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace macs {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::string strip_comment(const std::string& line) {
  const std::size_t pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

long long parse_id(const std::string& tok, int line_no) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    if (v < 0) throw ParseError(line_no, "node id must be nonnegative");
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError(line_no, "bad node id '" + tok + "'");
  }
}

double parse_real(const std::string& tok, int line_no, const char* what) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    if (!std::isfinite(v))
      throw ParseError(line_no, std::string(what) + " must be finite");
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError(line_no,
                     std::string("bad ") + what + " '" + tok + "'");
  }
}

struct RawEdge {
  long long u, v;
  double weight;
  bool fixed;
  int line;
};

ParsedGraph finish_parse(std::vector<RawEdge> raw,
                         std::vector<long long> extra_ids, int warnings) {
  std::vector<long long> ids = std::move(extra_ids);
  for (const RawEdge& e : raw) {
    ids.push_back(e.u);
    ids.push_back(e.v);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  std::map<long long, int> dense;
  for (std::size_t i = 0; i < ids.size(); ++i)
    dense[ids[i]] = static_cast<int>(i);

  std::map<std::pair<long long, long long>, int> seen;
  std::vector<WeightedEdge> edges;
  EdgePartition part;
  edges.reserve(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const RawEdge& e = raw[k];
    if (e.u == e.v) throw ParseError(e.line, "self-loop");
    if (!(e.weight > 0.0))
      throw ParseError(e.line, "weight must be positive");
    auto key = std::minmax(e.u, e.v);
    if (!seen.emplace(key, e.line).second)
      throw ParseError(e.line, "duplicate edge " + std::to_string(e.u) + " " +
                                   std::to_string(e.v));
    edges.push_back({dense[e.u], dense[e.v], e.weight});
    if (e.fixed)
      part.fixed.push_back(static_cast<int>(k));
    else
      part.candidate.push_back(static_cast<int>(k));
  }
  part.budget = static_cast<int>(part.candidate.size());

  Graph g(static_cast<int>(ids.size()), std::move(edges));
  return ParsedGraph{std::move(g), std::move(part), std::move(ids), warnings};
}

}  // namespace

WeightRule WeightRule::parse(const std::string& text) {
  WeightRule r;
  if (text == "trace") {
    r.kind = Kind::Trace;
  } else if (text == "min-eig-2x2-rot") {
    r.kind = Kind::MinEigBlocks;
  } else if (text.rfind("fixed:", 0) == 0) {
    r.kind = Kind::Fixed;
    r.fixed_value = parse_real(text.substr(6), 0, "fixed weight");
    if (!(r.fixed_value > 0.0))
      throw Error("fixed weight must be positive");
  } else {
    throw Error("unknown weight rule '" + text + "'");
  }
  return r;
}

std::string WeightRule::name() const {
  switch (kind) {
    case Kind::Trace:
      return "trace";
    case Kind::MinEigBlocks:
      return "min-eig-2x2-rot";
    case Kind::Fixed: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "fixed:%.17g", fixed_value);
      return buf;
    }
  }
  return "trace";
}

ParsedGraph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<RawEdge> raw;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::vector<std::string> tok = tokenize(strip_comment(line));
    if (tok.empty()) continue;
    if (tok.size() < 3 || tok.size() > 4)
      throw ParseError(line_no, "expected 'u v w [f|c]', got " +
                                    std::to_string(tok.size()) + " fields");
    RawEdge e;
    e.u = parse_id(tok[0], line_no);
    e.v = parse_id(tok[1], line_no);
    e.weight = parse_real(tok[2], line_no, "weight");
    e.fixed = false;
    e.line = line_no;
    if (tok.size() == 4) {
      if (tok[3] == "f")
        e.fixed = true;
      else if (tok[3] != "c")
        throw ParseError(line_no, "bad marker '" + tok[3] + "'");
    }
    raw.push_back(e);
  }
  return finish_parse(std::move(raw), {}, 0);
}

namespace {

// Reads the row-major upper triangle of a d x d information matrix.
Eigen::MatrixXd read_info(const std::vector<std::string>& tok,
                          std::size_t offset, int d, int line_no) {
  Eigen::MatrixXd info(d, d);
  std::size_t p = offset;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      const double v = parse_real(tok[p++], line_no, "information entry");
      info(i, j) = v;
      info(j, i) = v;
    }
  return info;
}

double reduce_info(const Eigen::MatrixXd& info, const WeightRule& rule,
                   int line_no) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
  if (lo < -1e-9 * std::max(1.0, hi))
    throw ParseError(line_no, "information matrix is not PSD");
  switch (rule.kind) {
    case WeightRule::Kind::Trace:
      return info.trace();
    case WeightRule::Kind::MinEigBlocks: {
      const int t = info.rows() == 3 ? 2 : 3;  // translation block size
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> trans(
          info.topLeftCorner(t, t));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rot(
          info.bottomRightCorner(info.rows() - t, info.cols() - t));
      return std::min(trans.eigenvalues().minCoeff(),
                      rot.eigenvalues().minCoeff());
    }
    case WeightRule::Kind::Fixed:
      return rule.fixed_value;
  }
  return 0.0;
}

}  // namespace

ParsedGraph parse_g2o(const std::string& text, const G2oOptions& opts) {
  std::istringstream in(text);
  std::string line;
  std::vector<RawEdge> raw;
  std::vector<long long> vertex_ids;
  int warnings = 0;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::vector<std::string> tok = tokenize(strip_comment(line));
    if (tok.empty()) continue;
    const std::string& tag = tok[0];
    if (tag == "VERTEX_SE2" || tag == "VERTEX_SE3:QUAT") {
      const std::size_t expect = tag == "VERTEX_SE2" ? 5 : 9;
      if (tok.size() != expect)
        throw ParseError(line_no, tag + " expects " +
                                      std::to_string(expect - 1) + " fields");
      vertex_ids.push_back(parse_id(tok[1], line_no));
    } else if (tag == "EDGE_SE2" || tag == "EDGE_SE3:QUAT") {
      const bool se2 = tag == "EDGE_SE2";
      // tag, i, j, measurement (3 or 7), info upper triangle (6 or 21)
      const std::size_t expect = se2 ? 1 + 2 + 3 + 6 : 1 + 2 + 7 + 21;
      if (tok.size() != expect)
        throw ParseError(line_no, tag + " expects " +
                                      std::to_string(expect - 1) + " fields");
      RawEdge e;
      e.u = parse_id(tok[1], line_no);
      e.v = parse_id(tok[2], line_no);
      const Eigen::MatrixXd info =
          read_info(tok, se2 ? 6 : 10, se2 ? 3 : 6, line_no);
      e.weight = reduce_info(info, opts.rule, line_no);
      if (!(e.weight > 0.0))
        throw ParseError(line_no, "weight rule produced a nonpositive value");
      e.fixed = opts.mark_odometry_fixed && std::llabs(e.u - e.v) == 1;
      e.line = line_no;
      raw.push_back(e);
    } else {
      ++warnings;
    }
  }
  return finish_parse(std::move(raw), std::move(vertex_ids), warnings);
}

InputFormat detect_format(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::vector<std::string> tok = tokenize(strip_comment(line));
    if (tok.empty()) continue;
    if (tok[0].rfind("VERTEX_", 0) == 0 || tok[0].rfind("EDGE_", 0) == 0)
      return InputFormat::G2o;
    return InputFormat::EdgeList;
  }
  return InputFormat::EdgeList;
}

ParsedGraph parse_graph_file(const std::string& path,
                             const std::string& format,
                             const G2oOptions& opts) {
  const std::string text = read_file(path);
  InputFormat f;
  if (format == "auto")
    f = detect_format(text);
  else if (format == "edgelist")
    f = InputFormat::EdgeList;
  else if (format == "g2o")
    f = InputFormat::G2o;
  else
    throw Error("unknown input format '" + format + "'");
  return f == InputFormat::G2o ? parse_g2o(text, opts)
                               : parse_edge_list(text);
}

void write_edge_list(std::ostream& os, const Graph& g,
                     const std::vector<int>& edges,
                     const std::vector<char>& fixed_marks,
                     const std::vector<long long>& original_ids) {
  if (!fixed_marks.empty() && fixed_marks.size() != edges.size())
    throw Error("fixed_marks size mismatch");
  auto orig = [&](NodeId i) -> long long {
    return original_ids.empty() ? i : original_ids[i];
  };
  char buf[128];
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const WeightedEdge& e = g.edge(edges[i]);
    const char mark = (!fixed_marks.empty() && fixed_marks[i]) ? 'f' : 'c';
    std::snprintf(buf, sizeof(buf), "%lld %lld %.17g %c\n", orig(e.u),
                  orig(e.v), e.weight, mark);
    os << buf;
  }
}

std::string to_edge_list(const Graph& g, const std::vector<int>& edges,
                         const std::vector<char>& fixed_marks,
                         const std::vector<long long>& original_ids) {
  std::ostringstream os;
  write_edge_list(os, g, edges, fixed_marks, original_ids);
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace macs
