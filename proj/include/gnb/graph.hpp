#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gnb/error.hpp"
#include "gnb/rng.hpp"

namespace gnb {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge canonical(Edge e) { return e.u <= e.v ? e : Edge{e.v, e.u}; }

/// Immutable undirected simple graph. Edges are kept canonical (u < v) and
/// sorted; the CSR arrays store both directions with sorted rows.
class Graph {
 public:
  Graph() = default;

  // Throws ParameterError on out-of-range ids, self-loops or duplicates.
  Graph(std::size_t num_nodes, std::vector<Edge> edges) : num_nodes_(num_nodes) {
    if (num_nodes > static_cast<std::size_t>(kNoNode)) {
      throw ParameterError("graph: too many nodes");
    }
    for (auto& e : edges) {
      if (e.u >= num_nodes || e.v >= num_nodes) {
        throw ParameterError("graph: edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                             ") references a node outside 0.." + std::to_string(num_nodes));
      }
      if (e.u == e.v) {
        throw ParameterError("graph: self-loop on node " + std::to_string(e.u));
      }
      e = canonical(e);
    }
    std::sort(edges.begin(), edges.end());
    auto dup = std::adjacent_find(edges.begin(), edges.end());
    if (dup != edges.end()) {
      throw ParameterError("graph: duplicate edge (" + std::to_string(dup->u) + "," +
                           std::to_string(dup->v) + ")");
    }
    edges_ = std::move(edges);

    offsets_.assign(num_nodes_ + 1, 0);
    for (const auto& e : edges_) {
      ++offsets_[e.u + 1];
      ++offsets_[e.v + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    indices_.resize(2 * edges_.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const auto& e : edges_) {
      indices_[fill[e.u]++] = e.v;
      indices_[fill[e.v]++] = e.u;
    }
    for (std::size_t i = 0; i < num_nodes_; ++i) {
      std::sort(indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
                indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]));
    }
  }

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::size_t>& row_offsets() const { return offsets_; }
  const std::vector<NodeId>& col_indices() const { return indices_; }

  std::span<const NodeId> neighbors(NodeId u) const {
    return {indices_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
  }
  std::size_t degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }

  bool has_edge(NodeId u, NodeId v) const {
    if (u >= num_nodes_ || v >= num_nodes_) return false;
    auto row = neighbors(u);
    return std::binary_search(row.begin(), row.end(), v);
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.num_nodes_ == b.num_nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> indices_;
};

struct WsParams {
  std::size_t n = 1000;
  std::size_t k = 4;
  double beta = 0.5;
  std::uint64_t seed = 0;
};

inline void validate(const WsParams& p) {
  if (p.k < 2 || p.k % 2 != 0) throw ParameterError("watts_strogatz: k must be even and >= 2");
  if (p.k >= p.n) throw ParameterError("watts_strogatz: k must be smaller than n");
  if (!(p.beta >= 0.0 && p.beta <= 1.0)) {
    throw ParameterError("watts_strogatz: beta must lie in [0, 1]");
  }
}

/// Ring lattice on n nodes, each joined to k/2 neighbors per side, followed by
/// Watts-Strogatz rewiring. Lattice edges (u, u+j) are visited by node, then by
/// offset j; with probability beta the far endpoint is replaced by a uniform
/// node that is neither u nor already adjacent to u. Edge count stays n*k/2.
inline Graph watts_strogatz(const WsParams& p) {
  validate(p);
  const std::size_t n = p.n;
  const std::size_t half = p.k / 2;
  std::vector<std::vector<NodeId>> adj(n);
  auto link = [&](NodeId a, NodeId b) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  };
  auto unlink = [&](NodeId a, NodeId b) {
    std::erase(adj[a], b);
    std::erase(adj[b], a);
  };
  auto adjacent = [&](NodeId a, NodeId b) {
    return std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end();
  };
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t j = 1; j <= half; ++j) {
      link(static_cast<NodeId>(u), static_cast<NodeId>((u + j) % n));
    }
  }
  Rng rng(p.seed, 0x5753);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t j = 1; j <= half; ++j) {
      const auto a = static_cast<NodeId>(u);
      const auto b = static_cast<NodeId>((u + j) % n);
      if (!rng.bernoulli(p.beta)) continue;
      if (adj[a].size() >= n - 1) continue;  // every target would duplicate
      NodeId w = 0;
      do {
        w = static_cast<NodeId>(rng.below(n));
      } while (w == a || adjacent(a, w));
      unlink(a, b);
      link(a, w);
    }
  }
  std::vector<Edge> edges;
  edges.reserve(n * half);
  for (std::size_t u = 0; u < n; ++u) {
    for (NodeId v : adj[u]) {
      if (u < v) edges.push_back({static_cast<NodeId>(u), v});
    }
  }
  return Graph(n, std::move(edges));
}

inline constexpr std::uint32_t kUnreachable = std::numeric_limits<std::uint32_t>::max();

struct BfsTree {
  NodeId root = 0;
  std::vector<std::uint32_t> dist;         // kUnreachable when not reached
  std::vector<NodeId> parent;              // kNoNode for the root and unreached nodes
  std::vector<std::vector<NodeId>> levels; // levels[i] sorted ascending
  std::uint32_t eccentricity = 0;

  bool reached_all() const {
    return std::none_of(dist.begin(), dist.end(), [](auto d) { return d == kUnreachable; });
  }
};

/// Breadth-first search from root. The parent of a node is its smallest-id
/// neighbor in the previous level.
inline BfsTree bfs(const Graph& g, NodeId root) {
  if (root >= g.num_nodes()) {
    throw ParameterError("bfs: root " + std::to_string(root) + " out of range");
  }
  BfsTree t;
  t.root = root;
  t.dist.assign(g.num_nodes(), kUnreachable);
  t.parent.assign(g.num_nodes(), kNoNode);
  t.dist[root] = 0;
  std::vector<NodeId> frontier{root};
  while (!frontier.empty()) {
    std::sort(frontier.begin(), frontier.end());
    t.levels.push_back(frontier);
    const std::uint32_t next_dist = static_cast<std::uint32_t>(t.levels.size());
    std::vector<NodeId> next;
    for (NodeId u : frontier) {
      for (NodeId v : g.neighbors(u)) {
        if (t.dist[v] == kUnreachable) {
          t.dist[v] = next_dist;
          next.push_back(v);
        }
      }
    }
    frontier = std::move(next);
  }
  t.eccentricity = static_cast<std::uint32_t>(t.levels.size() - 1);
  for (std::size_t i = 1; i < t.levels.size(); ++i) {
    for (NodeId v : t.levels[i]) {
      for (NodeId w : g.neighbors(v)) {
        if (t.dist[w] + 1 == t.dist[v]) {
          t.parent[v] = w;
          break;
        }
      }
    }
  }
  return t;
}

inline bool is_connected(const Graph& g) {
  return g.num_nodes() == 0 || bfs(g, 0).reached_all();
}

/// Per-node connected-component labels, numbered in order of smallest member.
inline std::vector<std::uint32_t> component_labels(const Graph& g) {
  std::vector<std::uint32_t> label(g.num_nodes(), kUnreachable);
  std::uint32_t next = 0;
  std::deque<NodeId> queue;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (label[s] != kUnreachable) continue;
    label[s] = next;
    queue.push_back(s);
    while (!queue.empty()) {
      NodeId u = queue.front();
      queue.pop_front();
      for (NodeId v : g.neighbors(u)) {
        if (label[v] == kUnreachable) {
          label[v] = next;
          queue.push_back(v);
        }
      }
    }
    ++next;
  }
  return label;
}

struct ComponentResult {
  Graph graph;
  std::vector<NodeId> old_to_new;  // kNoNode for dropped nodes
  std::vector<NodeId> new_to_old;
};

/// Induced subgraph on the largest connected component (ties go to the
/// component with the smallest member), ids compacted in ascending order.
inline ComponentResult giant_component(const Graph& g) {
  if (g.num_nodes() == 0) throw ParameterError("giant_component: empty graph");
  const auto label = component_labels(g);
  const std::uint32_t count = *std::max_element(label.begin(), label.end()) + 1;
  std::vector<std::size_t> sizes(count, 0);
  for (auto l : label) ++sizes[l];
  const auto best = static_cast<std::uint32_t>(
      std::max_element(sizes.begin(), sizes.end()) - sizes.begin());

  ComponentResult r;
  r.old_to_new.assign(g.num_nodes(), kNoNode);
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    if (label[u] == best) {
      r.old_to_new[u] = static_cast<NodeId>(r.new_to_old.size());
      r.new_to_old.push_back(u);
    }
  }
  std::vector<Edge> edges;
  for (const auto& e : g.edges()) {
    if (label[e.u] == best) edges.push_back({r.old_to_new[e.u], r.old_to_new[e.v]});
  }
  r.graph = Graph(r.new_to_old.size(), std::move(edges));
  return r;
}

struct DegreeStats {
  std::size_t min_degree = 0;
  std::size_t max_degree = 0;
  double mean_degree = 0.0;
  std::size_t num_edges = 0;
};

inline DegreeStats degree_stats(const Graph& g) {
  DegreeStats s;
  s.num_edges = g.num_edges();
  if (g.num_nodes() == 0) return s;
  s.min_degree = std::numeric_limits<std::size_t>::max();
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    s.min_degree = std::min(s.min_degree, g.degree(u));
    s.max_degree = std::max(s.max_degree, g.degree(u));
  }
  s.mean_degree = 2.0 * static_cast<double>(g.num_edges()) / static_cast<double>(g.num_nodes());
  return s;
}

}  // namespace gnb
