#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mrfbench/rng.hpp"

namespace mrfbench {

/// Unordered node pair, stored with first < second (0-based).
struct Edge {
  int u = 0;
  int v = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(int a, int b) {
  if (a == b) throw std::invalid_argument("self-loop edge");
  return a < b ? Edge{a, b} : Edge{b, a};
}

/// Simple undirected graph over nodes 0..d-1 with a canonical sorted edge list.
class Graph {
 public:
  Graph() = default;

  Graph(int d, std::vector<Edge> edges) : d_(d), edges_(std::move(edges)) {
    if (d < 1) throw std::invalid_argument("graph needs at least one node");
    for (auto& e : edges_) {
      e = make_edge(e.u, e.v);
      if (e.u < 0 || e.v >= d_) throw std::out_of_range("edge endpoint outside [0, d)");
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
      throw std::invalid_argument("duplicate edge");
  }

  int num_nodes() const noexcept { return d_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  bool has_edge(int a, int b) const {
    if (a == b) return false;
    return std::binary_search(edges_.begin(), edges_.end(), make_edge(a, b));
  }

  std::vector<std::vector<int>> adjacency() const {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(d_));
    for (const auto& e : edges_) {
      adj[e.u].push_back(e.v);
      adj[e.v].push_back(e.u);
    }
    for (auto& row : adj) std::sort(row.begin(), row.end());
    return adj;
  }

  std::vector<int> degrees() const {
    std::vector<int> deg(static_cast<std::size_t>(d_), 0);
    for (const auto& e : edges_) {
      ++deg[e.u];
      ++deg[e.v];
    }
    return deg;
  }

 private:
  int d_ = 0;
  std::vector<Edge> edges_;
};

struct NetworkStats {
  double avg_degree = 0.0;
  int max_degree = 0;
  double avg_clustering = 0.0;
};

/// rows x cols four-nearest-neighbour lattice (non-toroidal). Node (r, c) has index r*cols + c.
inline Graph generate_grid(int rows, int cols) {
  if (rows < 1 || cols < 1 || static_cast<long>(rows) * cols < 2)
    throw std::invalid_argument("grid needs rows*cols >= 2");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(rows) * (cols - 1) + static_cast<std::size_t>(cols) * (rows - 1));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int idx = r * cols + c;
      if (c + 1 < cols) edges.push_back({idx, idx + 1});
      if (r + 1 < rows) edges.push_back({idx, idx + cols});
    }
  }
  return Graph(rows * cols, std::move(edges));
}

/// Factorization rows*cols = d with rows <= cols and rows + cols minimal.
inline std::pair<int, int> grid_shape(int d) {
  if (d < 2) throw std::invalid_argument("grid needs d >= 2");
  int rows = 1;
  for (int r = 1; static_cast<long>(r) * r <= d; ++r)
    if (d % r == 0) rows = r;
  return {rows, d / rows};
}

enum class Attachment { degree_proportional, uniform };

/// Barabasi-Albert growth from a complete seed over m0 nodes. Each new node picks
/// m distinct targets sequentially; with degree_proportional, each pick has
/// probability proportional to current degree among the not-yet-chosen nodes.
inline Graph generate_scale_free(int d, int m0, int m, Engine& rng,
                                 Attachment rule = Attachment::degree_proportional) {
  if (m < 1 || m > m0) throw std::invalid_argument("scale-free needs 1 <= m <= m0");
  if (d <= m0) throw std::invalid_argument("scale-free needs d > m0");

  std::vector<Edge> edges;
  std::vector<long> degree(static_cast<std::size_t>(d), 0);
  for (int a = 0; a < m0; ++a) {
    for (int b = a + 1; b < m0; ++b) {
      edges.push_back({a, b});
      ++degree[a];
      ++degree[b];
    }
  }

  std::vector<int> chosen;
  for (int node = m0; node < d; ++node) {
    chosen.clear();
    for (int pick = 0; pick < m; ++pick) {
      long total = 0;
      for (int t = 0; t < node; ++t) {
        if (std::find(chosen.begin(), chosen.end(), t) != chosen.end()) continue;
        total += rule == Attachment::uniform ? 1 : degree[t];
      }
      int target = -1;
      if (total == 0) {
        // every remaining candidate has degree zero (m0 == 1 seed): fall back to uniform
        std::vector<int> free;
        for (int t = 0; t < node; ++t)
          if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) free.push_back(t);
        target = free[uniform_index(rng, free.size())];
      } else {
        long r = static_cast<long>(uniform_index(rng, static_cast<std::uint64_t>(total)));
        for (int t = 0; t < node; ++t) {
          if (std::find(chosen.begin(), chosen.end(), t) != chosen.end()) continue;
          r -= rule == Attachment::uniform ? 1 : degree[t];
          if (r < 0) {
            target = t;
            break;
          }
        }
      }
      chosen.push_back(target);
    }
    for (int t : chosen) {
      edges.push_back(make_edge(node, t));
      ++degree[t];
      ++degree[node];
    }
  }
  return Graph(d, std::move(edges));
}

/// Watts-Strogatz ring lattice with k nearest neighbours, each lattice edge
/// (i, i+j) rewired at its far endpoint with probability p.
inline Graph generate_small_world(int d, int k, double p, Engine& rng) {
  if (k < 2 || k % 2 != 0) throw std::invalid_argument("small-world needs even k >= 2");
  if (k >= d) throw std::invalid_argument("small-world needs k < d");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("rewiring probability outside [0, 1]");

  std::set<Edge> edges;
  for (int i = 0; i < d; ++i)
    for (int j = 1; j <= k / 2; ++j) edges.insert(make_edge(i, (i + j) % d));

  for (int j = 1; j <= k / 2; ++j) {
    for (int i = 0; i < d; ++i) {
      const Edge original = make_edge(i, (i + j) % d);
      if (uniform01(rng) >= p) continue;
      if (!edges.contains(original)) continue;
      // node i already adjacent to everyone else: nothing to rewire to
      int deg_i = 0;
      for (const auto& e : edges)
        if (e.u == i || e.v == i) ++deg_i;
      if (deg_i >= d - 1) continue;
      int target;
      do {
        target = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(d)));
      } while (target == i || edges.contains(make_edge(i, target)));
      edges.erase(original);
      edges.insert(make_edge(i, target));
    }
  }
  return Graph(d, std::vector<Edge>(edges.begin(), edges.end()));
}

inline NetworkStats structural_stats(const Graph& g) {
  NetworkStats s;
  const int d = g.num_nodes();
  if (d == 0) return s;
  const auto adj = g.adjacency();
  s.avg_degree = 2.0 * static_cast<double>(g.num_edges()) / d;
  double clustering_sum = 0.0;
  for (int v = 0; v < d; ++v) {
    const auto& nb = adj[v];
    const int deg = static_cast<int>(nb.size());
    s.max_degree = std::max(s.max_degree, deg);
    if (deg < 2) continue;
    long links = 0;
    for (std::size_t a = 0; a < nb.size(); ++a)
      for (std::size_t b = a + 1; b < nb.size(); ++b)
        if (std::binary_search(adj[nb[a]].begin(), adj[nb[a]].end(), nb[b])) ++links;
    clustering_sum += 2.0 * static_cast<double>(links) / (static_cast<double>(deg) * (deg - 1));
  }
  s.avg_clustering = clustering_sum / d;
  return s;
}

// Edge-list text format: header "d=<int>", then one 1-based "v v'" pair per line.

inline void write_graph(std::ostream& os, const Graph& g) {
  os << "d=" << g.num_nodes() << '\n';
  for (const auto& e : g.edges()) os << e.u + 1 << ' ' << e.v + 1 << '\n';
}

inline Graph read_graph(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("d=", 0) != 0)
    throw std::runtime_error("graph file: missing 'd=<int>' header");
  const int d = std::stoi(line.substr(2));
  std::vector<Edge> edges;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int a = 0, b = 0;
    if (!(ls >> a >> b)) throw std::runtime_error("graph file: malformed edge line '" + line + "'");
    if (a < 1 || b < 1 || a > d || b > d) throw std::runtime_error("graph file: node index out of range");
    edges.push_back(make_edge(a - 1, b - 1));
  }
  return Graph(d, std::move(edges));
}

}  // namespace mrfbench
