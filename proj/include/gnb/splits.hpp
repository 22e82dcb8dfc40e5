#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <variant>
#include <vector>

#include "gnb/error.hpp"
#include "gnb/features.hpp"
#include "gnb/graph.hpp"
#include "gnb/rng.hpp"

namespace gnb {

struct SplitRatios {
  double train = 0.85;
  double val = 0.05;
  double test = 0.10;
};

struct LinkSplit {
  std::vector<Edge> train_pos;
  std::vector<Edge> val_pos;
  std::vector<Edge> test_pos;
  std::vector<Edge> val_neg;
  std::vector<Edge> test_neg;
  Graph message_graph;  // train_pos edges only
  SplitRatios ratios;
  std::uint64_t seed = 0;
};

struct NodeSplit {
  std::vector<NodeId> train_ids;
  std::vector<NodeId> val_ids;
  std::vector<NodeId> test_ids;
};

namespace streams {
inline constexpr std::uint64_t kLinkSplit = 0x4c53504c;
inline constexpr std::uint64_t kNodeSplit = 0x4e53504c;
}  // namespace streams

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

inline void validate(const SplitRatios& r) {
  if (!(r.train > 0 && r.val > 0 && r.test > 0)) throw ParameterError("split ratios must be positive");
  if (std::abs(r.train + r.val + r.test - 1.0) > 1e-9) throw ParameterError("split ratios must sum to 1");
}

/// Draws `count` distinct uniform non-edges of g that are not in `exclude`;
/// gives up after 100 * count attempts.
inline std::vector<Edge> sample_non_edges(const Graph& g, std::size_t count, Rng& rng,
                                          std::set<Edge>& exclude) {
  std::vector<Edge> out;
  out.reserve(count);
  const std::size_t n = g.num_nodes();
  const std::size_t limit = 100 * std::max<std::size_t>(count, 1);
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (attempts++ >= limit || n < 2) {
      throw SamplingError("negative sampling: found " + std::to_string(out.size()) + " of " +
                          std::to_string(count) + " non-edges after " + std::to_string(limit) + " attempts");
    }
    const auto a = static_cast<NodeId>(rng.below(n));
    const auto b = static_cast<NodeId>(rng.below(n));
    if (a == b || g.has_edge(a, b)) continue;
    const Edge e = canonical({a, b});
    if (!exclude.insert(e).second) continue;
    out.push_back(e);
  }
  return out;
}

/// Uniform random edge partition plus 1:1 frozen negatives for val and test.
inline LinkSplit link_split(const GraphDataset& ds, const SplitRatios& ratios, std::uint64_t seed) {
  validate(ratios);
  const Graph& g = ds.graph;
  const std::size_t m = g.num_edges();
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(m) * ratios.val));
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(m) * ratios.test));
  if (n_val + n_test >= m || n_val == 0 || n_test == 0) {
    throw ParameterError("link_split: too few edges (" + std::to_string(m) + ") for the requested ratios");
  }
  Rng rng(seed, streams::kLinkSplit);
  std::vector<Edge> edges = g.edges();
  shuffle(edges, rng);

  LinkSplit s;
  s.ratios = ratios;
  s.seed = seed;
  s.test_pos.assign(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.val_pos.assign(edges.begin() + static_cast<std::ptrdiff_t>(n_test),
                   edges.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  s.train_pos.assign(edges.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), edges.end());
  std::set<Edge> used;
  s.val_neg = sample_non_edges(g, n_val, rng, used);
  s.test_neg = sample_non_edges(g, n_test, rng, used);
  s.message_graph = Graph(g.num_nodes(), s.train_pos);
  return s;
}

struct PerClassPolicy {
  std::size_t per_class = 20;
  std::size_t val = 30;
};

using NodeSplitPolicy = std::variant<PerClassPolicy, SplitRatios>;

inline NodeSplit node_split(const GraphDataset& ds, const NodeSplitPolicy& policy, std::uint64_t seed) {
  if (!ds.labels) throw ParameterError("node_split: dataset has no labels");
  const Labels& labels = *ds.labels;
  Rng rng(seed, streams::kNodeSplit);
  NodeSplit s;
  if (const auto* pc = std::get_if<PerClassPolicy>(&policy)) {
    const std::size_t classes = ds.num_classes();
    std::vector<std::vector<NodeId>> by_class(classes);
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<NodeId>(i));
    std::vector<NodeId> rest;
    for (std::size_t c = 0; c < classes; ++c) {
      auto& members = by_class[c];
      if (members.size() < pc->per_class) {
        throw ParameterError("node_split: class " + std::to_string(c) + " has " +
                             std::to_string(members.size()) + " nodes, fewer than " +
                             std::to_string(pc->per_class));
      }
      shuffle(members, rng);
      s.train_ids.insert(s.train_ids.end(), members.begin(),
                         members.begin() + static_cast<std::ptrdiff_t>(pc->per_class));
      rest.insert(rest.end(), members.begin() + static_cast<std::ptrdiff_t>(pc->per_class), members.end());
    }
    std::sort(rest.begin(), rest.end());
    shuffle(rest, rng);
    if (rest.size() < pc->val) throw ParameterError("node_split: not enough nodes for validation");
    s.val_ids.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(pc->val));
    s.test_ids.assign(rest.begin() + static_cast<std::ptrdiff_t>(pc->val), rest.end());
  } else {
    const auto& r = std::get<SplitRatios>(policy);
    validate(r);
    std::vector<NodeId> all(labels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<NodeId>(i);
    shuffle(all, rng);
    const auto n = static_cast<double>(all.size());
    const auto n_train = static_cast<std::size_t>(std::llround(n * r.train));
    const auto n_val = static_cast<std::size_t>(std::llround(n * r.val));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= all.size()) {
      throw ParameterError("node_split: too few nodes for the requested ratios");
    }
    s.train_ids.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val_ids.assign(all.begin() + static_cast<std::ptrdiff_t>(n_train),
                     all.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test_ids.assign(all.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), all.end());
  }
  std::sort(s.train_ids.begin(), s.train_ids.end());
  std::sort(s.val_ids.begin(), s.val_ids.end());
  std::sort(s.test_ids.begin(), s.test_ids.end());
  return s;
}

}  // namespace gnb
