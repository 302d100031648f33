#include "areal/graph.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "areal/linalg.hpp"

namespace areal {

Matrix AdjacencyGraph::adjacency() const {
  Matrix w = Matrix::Zero(n, n);
  for (const auto& [i, j] : edges) {
    w(i, j) = 1.0;
    w(j, i) = 1.0;
  }
  return w;
}

Vector AdjacencyGraph::degrees() const {
  Vector d = Vector::Zero(n);
  for (const auto& [i, j] : edges) {
    d[i] += 1.0;
    d[j] += 1.0;
  }
  return d;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void check_connected(const AdjacencyGraph& g) {
  if (g.n == 0) throw data_error("adjacency: empty graph");
  std::vector<std::vector<Index>> adj(g.n);
  for (const auto& [i, j] : g.edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  std::vector<char> seen(g.n, 0);
  Index components = 0;
  for (Index start = 0; start < g.n; ++start) {
    if (seen[start]) continue;
    ++components;
    std::vector<Index> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      for (Index w : adj[v])
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
    }
  }
  if (components > 1)
    throw data_error("adjacency: graph is disconnected (" +
                     std::to_string(components) + " components)");
}

}  // namespace

EdgeListLoad build_adjacency(
    const std::vector<std::pair<std::string, std::string>>& raw_edges) {
  std::set<std::string> label_set;
  for (std::size_t row = 0; row < raw_edges.size(); ++row) {
    const auto& [a, b] = raw_edges[row];
    if (a.empty() || b.empty())
      throw data_error("adjacency: blank label at row " +
                       std::to_string(row + 1));
    if (a == b)
      throw data_error("adjacency: self-edge '" + a + "' at row " +
                       std::to_string(row + 1));
    label_set.insert(a);
    label_set.insert(b);
  }

  EdgeListLoad out;
  out.graph.labels.assign(label_set.begin(), label_set.end());
  out.graph.n = static_cast<Index>(out.graph.labels.size());
  std::map<std::string, Index> index;
  for (Index i = 0; i < out.graph.n; ++i) index[out.graph.labels[i]] = i;

  std::set<std::pair<Index, Index>> edge_set;
  for (const auto& [a, b] : raw_edges) {
    Index i = index[a], j = index[b];
    if (i > j) std::swap(i, j);
    if (!edge_set.insert({i, j}).second) ++out.duplicate_rows;
  }
  out.graph.edges.assign(edge_set.begin(), edge_set.end());
  check_connected(out.graph);
  return out;
}

EdgeListLoad load_adjacency(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("adjacency: cannot open '" + path + "'");
  std::vector<std::pair<std::string, std::string>> raw;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string a, b, extra;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
      throw data_error("adjacency: malformed row " + std::to_string(row) +
                       " in '" + path + "'");
    if (std::getline(ss, extra, ',') && !trim(extra).empty())
      throw data_error("adjacency: too many columns at row " +
                       std::to_string(row) + " in '" + path + "'");
    raw.emplace_back(trim(a), trim(b));
  }
  return build_adjacency(raw);
}

CarStructure build_car_precision(const AdjacencyGraph& g, double alpha,
                                 double c) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw config_error("car: alpha must lie in (0, 1)");
  if (!(c > 0.0)) throw config_error("car: scaling factor must be positive");
  CarStructure out;
  out.alpha = alpha;
  out.c = c;
  out.precision = c * (Matrix(g.degrees().asDiagonal()) - alpha * g.adjacency());
  // PD check; failure here means a broken graph invariant, not user input.
  (void)cholesky_spd(out.precision);
  return out;
}

double compute_scaling_factor(const AdjacencyGraph& g, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw config_error("car: alpha must lie in (0, 1)");
  const Matrix base =
      Matrix(g.degrees().asDiagonal()) - alpha * g.adjacency();
  const Matrix inv = spd_inverse(base);
  double log_sum = 0.0;
  for (Index i = 0; i < g.n; ++i) log_sum += std::log(inv(i, i));
  return std::exp(log_sum / static_cast<double>(g.n));
}

std::vector<std::pair<Index, Index>> neighbor_pairs(const AdjacencyGraph& g) {
  return g.edges;  // already (i < j), sorted lexicographically
}

}  // namespace areal
