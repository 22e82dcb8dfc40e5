#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gnb/error.hpp"
#include "gnb/graph.hpp"
#include "gnb/rng.hpp"
#include "gnb/tensor.hpp"

namespace gnb {

// Standard normal N(0, I_dim).
struct GaussianSpec {
  std::size_t dim = 1000;
};

struct SynthParams {
  GaussianSpec dist;
  NodeId root = 0;
  double gamma = 0.0;
  double nu = 1.0;
  std::uint64_t seed = 0;
};

struct FeatureMatrix {
  Matrix data;

  FeatureMatrix() = default;
  explicit FeatureMatrix(Matrix m) : data(std::move(m)) {}
  std::size_t rows() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(data.cols()); }
  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
    return a.data.rows() == b.data.rows() && a.data.cols() == b.data.cols() &&
           (a.data.array() == b.data.array()).all();
  }
};

using Labels = std::vector<std::uint32_t>;
using Provenance = std::map<std::string, std::string>;

struct GraphDataset {
  Graph graph;
  FeatureMatrix features;
  std::optional<Labels> labels;
  std::string name;
  Provenance provenance;

  std::size_t num_classes() const {
    if (!labels || labels->empty()) return 0;
    return *std::max_element(labels->begin(), labels->end()) + 1;
  }
};

inline void validate(const GraphDataset& ds) {
  if (ds.features.rows() != ds.graph.num_nodes()) {
    throw FormatError("dataset '" + ds.name + "': " + std::to_string(ds.features.rows()) +
                      " feature rows for " + std::to_string(ds.graph.num_nodes()) + " nodes");
  }
  if (!ds.features.data.allFinite()) throw FormatError("dataset '" + ds.name + "': non-finite feature");
  if (ds.labels && ds.labels->size() != ds.graph.num_nodes()) {
    throw FormatError("dataset '" + ds.name + "': label count does not match node count");
  }
}

namespace streams {
inline constexpr std::uint64_t kFeatures = 0x46454154;
inline constexpr std::uint64_t kRoot = 0x524f4f54;
inline constexpr std::uint64_t kLabels = 0x4c41424c;
}  // namespace streams

namespace detail {
// Noise vector for one node: a function of (seed, node) only.
inline void draw_gaussian(std::uint64_t seed, NodeId node, Eigen::Ref<Vector> out) {
  Rng rng(seed, streams::kFeatures, node);
  for (Eigen::Index j = 0; j < out.size(); ++j) out[j] = rng.normal();
}
}  // namespace detail

inline FeatureMatrix sample_iid_features(std::size_t n, const GaussianSpec& dist, std::uint64_t seed) {
  if (n < 1 || dist.dim < 1) throw ParameterError("sample_iid_features: n and dim must be >= 1");
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dist.dim));
  Vector z(x.cols());
  for (std::size_t i = 0; i < n; ++i) {
    detail::draw_gaussian(seed, static_cast<NodeId>(i), z);
    x.row(static_cast<Eigen::Index>(i)) = z.transpose();
  }
  return FeatureMatrix(std::move(x));
}

/// Features with breadth-first parental dependence: the root gets a fresh
/// draw, then level by level every node gets gamma * x_parent + nu * z, with
/// parents from bfs(graph, root).
inline FeatureMatrix synthesize_parametric(const Graph& graph, const SynthParams& p) {
  if (p.dist.dim < 1) throw ParameterError("synthesize_parametric: dim must be >= 1");
  if (!std::isfinite(p.gamma) || !std::isfinite(p.nu)) {
    throw ParameterError("synthesize_parametric: gamma and nu must be finite");
  }
  if (p.root >= graph.num_nodes()) throw ParameterError("synthesize_parametric: root out of range");
  const BfsTree tree = bfs(graph, p.root);
  if (!tree.reached_all()) {
    throw StructuralError("synthesize_parametric: graph is disconnected; reduce it to its giant component first");
  }
  Matrix x(static_cast<Eigen::Index>(graph.num_nodes()), static_cast<Eigen::Index>(p.dist.dim));
  Vector z(x.cols());
  detail::draw_gaussian(p.seed, p.root, z);
  x.row(p.root) = z.transpose();
  for (std::size_t level = 1; level < tree.levels.size(); ++level) {
    for (NodeId v : tree.levels[level]) {
      detail::draw_gaussian(p.seed, v, z);
      x.row(v) = p.gamma * x.row(tree.parent[v]) + p.nu * z.transpose();
    }
  }
  return FeatureMatrix(std::move(x));
}

// Rounds every entry to 32-bit precision so the in-memory dataset equals what
// the on-disk format stores.
inline void round_to_storage(FeatureMatrix& f) {
  f.data = f.data.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
}

inline constexpr std::size_t kWsNodes = 1000;
inline constexpr std::size_t kWsDegree = 4;
inline constexpr double kWsBeta = 0.5;
inline constexpr std::size_t kWsFeatureDim = 1000;

struct WsGraph {
  Graph graph;
  Provenance provenance;
};

/// The shared WS1000 graph: WS(1000, 4, 0.5), reduced to its giant component
/// when the sample is disconnected (recorded in provenance).
inline WsGraph make_ws1000_graph(std::uint64_t graph_seed) {
  WsParams wp{kWsNodes, kWsDegree, kWsBeta, graph_seed};
  Graph g = watts_strogatz(wp);
  WsGraph out;
  out.provenance["ws_n"] = std::to_string(wp.n);
  out.provenance["ws_k"] = std::to_string(wp.k);
  out.provenance["ws_beta"] = format_double(wp.beta);
  out.provenance["graph_seed"] = std::to_string(graph_seed);
  out.provenance["ws_edges"] = std::to_string(g.num_edges());
  if (!is_connected(g)) {
    auto gc = giant_component(g);
    out.provenance["component_reduced"] = "true";
    out.provenance["component_nodes"] = std::to_string(gc.graph.num_nodes());
    out.graph = std::move(gc.graph);
  } else {
    out.provenance["component_reduced"] = "false";
    out.graph = std::move(g);
  }
  return out;
}

inline GraphDataset make_ws1000(std::uint64_t graph_seed, std::uint64_t feature_seed) {
  auto ws = make_ws1000_graph(graph_seed);
  GraphDataset ds;
  ds.features = sample_iid_features(ws.graph.num_nodes(), GaussianSpec{kWsFeatureDim}, feature_seed);
  round_to_storage(ds.features);
  ds.graph = std::move(ws.graph);
  ds.name = "WS1000";
  ds.provenance = std::move(ws.provenance);
  ds.provenance["family"] = "ws1000";
  ds.provenance["feature_seed"] = std::to_string(feature_seed);
  ds.provenance["feature_dim"] = std::to_string(kWsFeatureDim);
  return ds;
}

inline NodeId draw_root(std::size_t num_nodes, std::uint64_t root_seed) {
  Rng rng(root_seed, streams::kRoot);
  return static_cast<NodeId>(rng.below(num_nodes));
}

inline std::string gamma_dataset_name(double gamma) { return "WS1000_γ=" + format_double(gamma); }

/// WS1000_gamma: the WS1000 graph for graph_seed, root drawn uniformly with
/// root_seed, nu = 1, features from synthesize_parametric.
inline GraphDataset make_ws1000_gamma(std::uint64_t graph_seed, std::uint64_t feature_seed,
                                      std::uint64_t root_seed, double gamma) {
  if (!std::isfinite(gamma)) throw ParameterError("make_ws1000_gamma: gamma must be finite");
  auto ws = make_ws1000_graph(graph_seed);
  SynthParams sp;
  sp.dist.dim = kWsFeatureDim;
  sp.root = draw_root(ws.graph.num_nodes(), root_seed);
  sp.gamma = gamma;
  sp.nu = 1.0;
  sp.seed = feature_seed;
  GraphDataset ds;
  ds.features = synthesize_parametric(ws.graph, sp);
  round_to_storage(ds.features);
  ds.graph = std::move(ws.graph);
  ds.name = gamma_dataset_name(gamma);
  ds.provenance = std::move(ws.provenance);
  ds.provenance["family"] = "ws1000-gamma";
  ds.provenance["feature_seed"] = std::to_string(feature_seed);
  ds.provenance["root_seed"] = std::to_string(root_seed);
  ds.provenance["root"] = std::to_string(sp.root);
  ds.provenance["gamma"] = format_double(gamma);
  ds.provenance["nu"] = format_double(sp.nu);
  ds.provenance["feature_dim"] = std::to_string(kWsFeatureDim);
  return ds;
}

// Node labels: BFS distance from root, modulo 2.
inline Labels bfs_parity_labels(const Graph& g, NodeId root) {
  const auto tree = bfs(g, root);
  Labels out(g.num_nodes());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (tree.dist[i] == kUnreachable) throw StructuralError("bfs_parity_labels: graph is disconnected");
    out[i] = tree.dist[i] % 2;
  }
  return out;
}

inline Labels random_labels(std::size_t n, std::size_t classes, std::uint64_t seed) {
  if (classes < 1) throw ParameterError("random_labels: need at least one class");
  Rng rng(seed, streams::kLabels);
  Labels out(n);
  for (auto& l : out) l = static_cast<std::uint32_t>(rng.below(classes));
  return out;
}

inline FeatureMatrix one_hot(const Labels& labels, std::size_t classes) {
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(classes));
  for (std::size_t i = 0; i < labels.size(); ++i) x(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  return FeatureMatrix(std::move(x));
}

/// WS1000 graph with uniform random labels and features equal to one-hot(label):
/// a node-classification sanity dataset that is separable by construction.
inline GraphDataset make_onehot_label_dataset(std::uint64_t graph_seed, std::uint64_t label_seed,
                                              std::size_t classes) {
  auto ws = make_ws1000_graph(graph_seed);
  GraphDataset ds;
  ds.labels = random_labels(ws.graph.num_nodes(), classes, label_seed);
  ds.features = one_hot(*ds.labels, classes);
  ds.graph = std::move(ws.graph);
  ds.name = "WS1000-onehot";
  ds.provenance = std::move(ws.provenance);
  ds.provenance["family"] = "onehot-labels";
  ds.provenance["label_seed"] = std::to_string(label_seed);
  ds.provenance["classes"] = std::to_string(classes);
  return ds;
}

}  // namespace gnb
