#include "dlmc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace dlmc {

bool Graph::connected() const {
  if (vertex_count <= 0) return false;
  if (vertex_count == 1) return true;
  std::vector<std::vector<int>> adj(vertex_count);
  for (auto [i, j] : edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  std::vector<char> seen(vertex_count, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  return reached == vertex_count;
}

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(vertex_count, 0);
  for (auto [i, j] : edges) {
    ++deg[i];
    ++deg[j];
  }
  return deg;
}

Graph make_graph(int vertex_count, std::vector<std::pair<int, int>> edges) {
  if (vertex_count < 1) throw std::invalid_argument("graph: vertex_count must be >= 1");
  for (auto& e : edges) {
    if (e.first == e.second) throw std::invalid_argument("graph: self-loop");
    if (e.first < 0 || e.second < 0 || e.first >= vertex_count || e.second >= vertex_count)
      throw std::invalid_argument("graph: edge endpoint out of range");
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return Graph{vertex_count, std::move(edges)};
}

Topology topology_from_string(const std::string& name) {
  if (name == "ring") return Topology::Ring;
  if (name == "path") return Topology::Path;
  if (name == "complete") return Topology::Complete;
  if (name == "star") return Topology::Star;
  if (name == "grid2d") return Topology::Grid2d;
  if (name == "erdos_renyi") return Topology::ErdosRenyi;
  throw std::invalid_argument("unknown topology: " + name);
}

std::string to_string(Topology kind) {
  switch (kind) {
    case Topology::Ring: return "ring";
    case Topology::Path: return "path";
    case Topology::Complete: return "complete";
    case Topology::Star: return "star";
    case Topology::Grid2d: return "grid2d";
    case Topology::ErdosRenyi: return "erdos_renyi";
  }
  return "?";
}

namespace {

Graph grid2d(int m, int rows) {
  if (rows == 0) {
    for (int r = static_cast<int>(std::sqrt(static_cast<double>(m))); r >= 1; --r) {
      if (m % r == 0) {
        rows = r;
        break;
      }
    }
  }
  if (rows < 1 || m % rows != 0)
    throw std::invalid_argument("grid2d: m must factor as rows x cols");
  const int cols = m / rows;
  std::vector<std::pair<int, int>> edges;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      int v = r * cols + c;
      if (c + 1 < cols) edges.emplace_back(v, v + 1);
      if (r + 1 < rows) edges.emplace_back(v, v + cols);
    }
  }
  return make_graph(m, std::move(edges));
}

Graph erdos_renyi(int m, const TopologyParams& p) {
  if (!(p.edge_prob > 0.0 && p.edge_prob < 1.0))
    throw std::invalid_argument("erdos_renyi: edge_prob must lie in (0,1)");
  std::mt19937_64 gen(p.seed);
  std::bernoulli_distribution coin(p.edge_prob);
  for (int attempt = 0; attempt < p.retries; ++attempt) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (coin(gen)) edges.emplace_back(i, j);
    Graph g = make_graph(m, std::move(edges));
    if (g.connected()) return g;
  }
  throw std::runtime_error("erdos_renyi: no connected sample within retry budget");
}

}  // namespace

Graph build_topology(Topology kind, int m, const TopologyParams& extra) {
  if (m < 2) throw std::invalid_argument("build_topology: m must be >= 2");
  std::vector<std::pair<int, int>> edges;
  switch (kind) {
    case Topology::Ring:
      for (int i = 0; i < m; ++i) edges.emplace_back(i, (i + 1) % m);
      break;
    case Topology::Path:
      for (int i = 0; i + 1 < m; ++i) edges.emplace_back(i, i + 1);
      break;
    case Topology::Complete:
      for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) edges.emplace_back(i, j);
      break;
    case Topology::Star:
      for (int i = 1; i < m; ++i) edges.emplace_back(0, i);
      break;
    case Topology::Grid2d:
      return grid2d(m, extra.rows);
    case Topology::ErdosRenyi:
      return erdos_renyi(m, extra);
  }
  return make_graph(m, std::move(edges));
}

void to_json(nlohmann::json& j, const Graph& g) {
  j = nlohmann::json{{"vertex_count", g.vertex_count}, {"edges", g.edges}};
}

void from_json(const nlohmann::json& j, Graph& g) {
  std::vector<std::pair<int, int>> edges = j.at("edges").get<std::vector<std::pair<int, int>>>();
  g = make_graph(j.at("vertex_count").get<int>(), std::move(edges));
}

}  // namespace dlmc
