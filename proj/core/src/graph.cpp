#include "decopt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "decopt/errors.hpp"

namespace decopt {

int Graph::max_neighborhood_size() const {
  int best = 0;
  for (const auto& nb : neighborhoods) best = std::max<int>(best, static_cast<int>(nb.size()));
  return best;
}

bool Graph::adjacent(int i, int j) const {
  const auto& nb = neighborhoods[i];
  return std::binary_search(nb.begin(), nb.end(), j);
}

Graph build_graph(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n <= 0) throw InvalidParameterError("graph needs at least one node");
  std::set<std::pair<int, int>> normalized;
  for (auto [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw IndexOutOfRangeError("edge endpoint out of range: (" + std::to_string(a) +
                                 ", " + std::to_string(b) + ") with n=" + std::to_string(n));
    if (a == b) throw SelfLoopError("self loop at node " + std::to_string(a));
    normalized.insert({std::min(a, b), std::max(a, b)});
  }

  Graph g;
  g.n = n;
  g.edges.assign(normalized.begin(), normalized.end());
  g.neighborhoods.assign(n, {});
  for (int i = 0; i < n; ++i) g.neighborhoods[i].push_back(i);
  for (auto [a, b] : g.edges) {
    g.neighborhoods[a].push_back(b);
    g.neighborhoods[b].push_back(a);
  }
  for (auto& nb : g.neighborhoods) std::sort(nb.begin(), nb.end());

  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 0;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    ++count;
    for (int w : g.neighborhoods[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  if (count != n) throw DisconnectedGraphError("graph is not connected");
  return g;
}

Graph path_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return build_graph(n, e);
}

Graph ring_graph(int n) {
  if (n < 3) throw InvalidParameterError("ring needs at least 3 nodes");
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
  return build_graph(n, e);
}

Graph complete_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.push_back({i, j});
  return build_graph(n, e);
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

}  // namespace

Graph random_geometric_graph(int n, double target_avg_degree, std::uint64_t seed) {
  if (n <= 0) throw InvalidParameterError("graph needs at least one node");
  if (target_avg_degree <= 0) throw InvalidParameterError("target average degree must be positive");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> px(n), py(n);
  for (int i = 0; i < n; ++i) {
    px[i] = unit(rng);
    py[i] = unit(rng);
  }

  // Expected degree within radius r for uniform points is roughly n*pi*r^2.
  double r2 = std::min(1.0, target_avg_degree / (n * 3.14159265358979323846));
  std::set<std::pair<int, int>> edges;
  auto dist2 = [&](int a, int b) {
    double dx = px[a] - px[b], dy = py[a] - py[b];
    return dx * dx + dy * dy;
  };
  UnionFind uf(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (dist2(i, j) <= r2) {
        edges.insert({i, j});
        uf.unite(i, j);
      }

  // Bridge remaining components with the shortest available crossing edge.
  for (;;) {
    int best_a = -1, best_b = -1;
    double best = 1e300;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (uf.find(i) != uf.find(j) && dist2(i, j) < best) {
          best = dist2(i, j);
          best_a = i;
          best_b = j;
        }
    if (best_a < 0) break;
    edges.insert({best_a, best_b});
    uf.unite(best_a, best_b);
  }

  return build_graph(n, {edges.begin(), edges.end()});
}

Graph load_graph(std::istream& in) {
  std::string line;
  int n = -1;
  std::vector<std::pair<int, int>> edges;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    if (n < 0) {
      if (ls >> n) {
        if (n <= 0) throw ConfigError("graph file: node count must be positive");
      }
      continue;
    }
    int a, b;
    if (ls >> a) {
      if (!(ls >> b))
        throw ConfigError("graph file line " + std::to_string(lineno) + ": expected two endpoints");
      if (a < 1 || a > n || b < 1 || b > n)
        throw IndexOutOfRangeError("graph file line " + std::to_string(lineno) +
                                   ": endpoint out of range");
      edges.push_back({a - 1, b - 1});
    }
  }
  if (n < 0) throw ConfigError("graph file: missing node count");
  return build_graph(n, edges);
}

void save_graph(const Graph& g, std::ostream& out) {
  out << g.n << "\n";
  for (auto [a, b] : g.edges) out << (a + 1) << " " << (b + 1) << "\n";
}

}  // namespace decopt
