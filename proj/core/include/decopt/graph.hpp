#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace decopt {

// Undirected connected graph over nodes 0..n-1. Neighborhoods are closed:
// neighbors(i) always contains i itself, sorted ascending. Edge lists are
// normalized to (lo, hi) pairs sorted lexicographically.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> neighborhoods;

  const std::vector<int>& neighbors(int i) const { return neighborhoods[i]; }
  int degree(int i) const { return static_cast<int>(neighborhoods[i].size()) - 1; }
  int max_neighborhood_size() const;
  bool adjacent(int i, int j) const;
};

// Validates indices, rejects self loops and duplicate edges, requires
// connectivity. Nodes are 0-based.
Graph build_graph(int n, const std::vector<std::pair<int, int>>& edges);

Graph path_graph(int n);
Graph ring_graph(int n);
Graph complete_graph(int n);

// Connected random geometric graph: n points in the unit square, edges within
// a radius chosen to hit target_avg_degree, extra nearest-neighbor edges added
// to connect stray components. Deterministic in (n, target_avg_degree, seed).
Graph random_geometric_graph(int n, double target_avg_degree, std::uint64_t seed);

// Text edge-list format: first line "n", then one "i j" line per edge with
// 1-based endpoints.
Graph load_graph(std::istream& in);
void save_graph(const Graph& g, std::ostream& out);

}  // namespace decopt
