#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace dlmc {

// Undirected simple graph on vertices 0..vertex_count-1.
// Edges are stored normalized (i < j), sorted, without duplicates.
struct Graph {
  int vertex_count = 0;
  std::vector<std::pair<int, int>> edges;

  bool connected() const;
  std::vector<int> degrees() const;
};

// Normalizes, deduplicates and validates an edge list (no self-loops,
// endpoints in range).
Graph make_graph(int vertex_count, std::vector<std::pair<int, int>> edges);

enum class Topology { Ring, Path, Complete, Star, Grid2d, ErdosRenyi };

Topology topology_from_string(const std::string& name);
std::string to_string(Topology kind);

struct TopologyParams {
  double edge_prob = 0.3;   // erdos_renyi
  std::uint64_t seed = 1;   // erdos_renyi
  int retries = 64;         // erdos_renyi: resample budget until connected
  int rows = 0;             // grid2d; 0 = most-square factorization of m
};

// Named topology generators, m >= 2. Erdos-Renyi resamples until connected
// and fails after the retry budget.
Graph build_topology(Topology kind, int m, const TopologyParams& extra = {});

void to_json(nlohmann::json& j, const Graph& g);
void from_json(const nlohmann::json& j, Graph& g);

}  // namespace dlmc
