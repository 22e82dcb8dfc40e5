#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gnb/autodiff.hpp"
#include "gnb/error.hpp"
#include "gnb/graph.hpp"
#include "gnb/rng.hpp"
#include "gnb/tensor.hpp"

namespace gnb {

/// Symmetric-normalized adjacency D^-1/2 (A + I) D^-1/2 (or D^-1/2 A D^-1/2
/// without self-loops), stored as CSR.
struct NormAdj : SparseCsr {};

inline NormAdj normalize_adjacency(const Graph& g, bool self_loops = true) {
  NormAdj a;
  a.n = g.num_nodes();
  std::vector<double> inv_sqrt(a.n, 0.0);
  for (NodeId u = 0; u < a.n; ++u) {
    const double d = static_cast<double>(g.degree(u)) + (self_loops ? 1.0 : 0.0);
    inv_sqrt[u] = d > 0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  a.offsets.assign(a.n + 1, 0);
  for (NodeId u = 0; u < a.n; ++u) {
    bool diag_done = !self_loops;
    auto emit = [&](NodeId v) {
      a.cols.push_back(v);
      a.values.push_back(inv_sqrt[u] * inv_sqrt[v]);
    };
    for (NodeId v : g.neighbors(u)) {
      if (!diag_done && v > u) {
        emit(u);
        diag_done = true;
      }
      emit(v);
    }
    if (!diag_done) emit(u);
    a.offsets[u + 1] = a.cols.size();
  }
  return a;
}

enum class ModelKind { kMlp, kGcn };

inline std::string to_string(ModelKind k) { return k == ModelKind::kMlp ? "mlp" : "gcn"; }
inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "mlp") return ModelKind::kMlp;
  if (s == "gcn") return ModelKind::kGcn;
  throw ParameterError("unknown model '" + s + "' (expected mlp or gcn)");
}

enum class Activation { kRelu };
enum class WeightInit { kGlorotUniform };

struct MlpConfig {
  std::size_t in_dim = 1;
  std::vector<std::size_t> hidden_dims{64, 64};
  std::size_t out_dim = 1;
  double dropout = 0.0;
  Activation activation = Activation::kRelu;
  WeightInit weight_init = WeightInit::kGlorotUniform;
  bool bias = true;
};

struct GcnConfig {
  std::size_t in_dim = 1;
  std::size_t hidden_dim = 64;
  std::size_t out_dim = 1;
  std::size_t num_layers = 2;
  double dropout = 0.0;
  bool self_loops = true;
  bool bias = true;
};

inline std::vector<std::size_t> layer_dims(const MlpConfig& c) {
  std::vector<std::size_t> d{c.in_dim};
  d.insert(d.end(), c.hidden_dims.begin(), c.hidden_dims.end());
  d.push_back(c.out_dim);
  return d;
}

inline std::vector<std::size_t> layer_dims(const GcnConfig& c) {
  std::vector<std::size_t> d{c.in_dim};
  for (std::size_t i = 1; i < c.num_layers; ++i) d.push_back(c.hidden_dim);
  d.push_back(c.out_dim);
  return d;
}

inline void validate(const MlpConfig& c) {
  for (auto d : layer_dims(c)) {
    if (d < 1) throw ParameterError("mlp: layer dimensions must be >= 1");
  }
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw ParameterError("mlp: dropout must lie in [0, 1)");
}

inline void validate(const GcnConfig& c) {
  if (c.num_layers < 1) throw ParameterError("gcn: num_layers must be >= 1");
  for (auto d : layer_dims(c)) {
    if (d < 1) throw ParameterError("gcn: layer dimensions must be >= 1");
  }
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw ParameterError("gcn: dropout must lie in [0, 1)");
}

/// Parameters stored as [W0, b0, W1, b1, ...]; biases are 1 x out.
using Params = std::vector<Tensor2>;

namespace streams {
inline constexpr std::uint64_t kInit = 0x494e4954;
}

// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
inline Params init_layers(const std::vector<std::size_t>& dims, bool bias, std::uint64_t seed) {
  Params p;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
    Rng rng(seed, streams::kInit, l);
    Matrix w(static_cast<Eigen::Index>(dims[l]), static_cast<Eigen::Index>(dims[l + 1]));
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
    p.emplace_back(std::move(w));
    if (bias) p.emplace_back(Matrix::Zero(1, static_cast<Eigen::Index>(dims[l + 1])));
  }
  return p;
}

inline Params init_params(const MlpConfig& c, std::uint64_t seed) {
  validate(c);
  return init_layers(layer_dims(c), c.bias, seed);
}
inline Params init_params(const GcnConfig& c, std::uint64_t seed) {
  validate(c);
  return init_layers(layer_dims(c), c.bias, seed);
}

namespace detail {
inline void check_params(const std::vector<std::size_t>& shape, bool bias, const Params& p, const char* who) {
  const std::size_t per = bias ? 2 : 1;
  if (p.size() != per * (shape.size() - 1)) throw ShapeError(std::string(who) + ": wrong parameter count");
  for (std::size_t l = 0; l + 1 < shape.size(); ++l) {
    const auto& w = p[per * l];
    if (w.rows() != static_cast<Eigen::Index>(shape[l]) || w.cols() != static_cast<Eigen::Index>(shape[l + 1])) {
      throw ShapeError(std::string(who) + ": weight " + std::to_string(l) + " has shape " + dims(w.value));
    }
    if (bias && (p[per * l + 1].rows() != 1 || p[per * l + 1].cols() != w.cols())) {
      throw ShapeError(std::string(who) + ": bias " + std::to_string(l) + " has wrong shape");
    }
  }
}
}  // namespace detail

/// Row-wise MLP: (affine -> ReLU -> dropout)* then a final affine layer.
/// Dropout is applied only when train is set.
inline Var mlp_forward(const MlpConfig& c, Params& p, Var x, bool train, Rng& rng) {
  validate(c);
  const auto dims = layer_dims(c);
  if (x.cols() != static_cast<Eigen::Index>(c.in_dim)) {
    throw ShapeError("mlp: input has " + std::to_string(x.cols()) + " columns, expected " + std::to_string(c.in_dim));
  }
  detail::check_params(dims, c.bias, p, "mlp");
  Tape& t = *x.tape();
  const std::size_t per = c.bias ? 2 : 1;
  Var h = x;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    h = matmul(h, t.parameter(p[per * l]));
    if (c.bias) h = add_row(h, t.parameter(p[per * l + 1]));
    if (l + 2 < dims.size()) {
      h = relu(h);
      if (train) h = dropout(h, c.dropout, rng);
    }
  }
  return h;
}

/// GCN: H <- ReLU(A_hat (H W) + b) with dropout between layers; the last
/// layer has no activation.
inline Var gcn_forward(const GcnConfig& c, Params& p, const NormAdj& adj, Var x, bool train, Rng& rng) {
  validate(c);
  const auto dims = layer_dims(c);
  if (x.cols() != static_cast<Eigen::Index>(c.in_dim)) {
    throw ShapeError("gcn: input has " + std::to_string(x.cols()) + " columns, expected " + std::to_string(c.in_dim));
  }
  if (adj.n != static_cast<std::size_t>(x.rows())) {
    throw ShapeError("gcn: adjacency is " + std::to_string(adj.n) + " nodes, input has " + std::to_string(x.rows()) + " rows");
  }
  detail::check_params(dims, c.bias, p, "gcn");
  Tape& t = *x.tape();
  const std::size_t per = c.bias ? 2 : 1;
  Var h = x;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    h = spmm(adj, matmul(h, t.parameter(p[per * l])));
    if (c.bias) h = add_row(h, t.parameter(p[per * l + 1]));
    if (l + 2 < dims.size()) {
      h = relu(h);
      if (train) h = dropout(h, c.dropout, rng);
    }
  }
  return h;
}

// Eval-mode conveniences (no dropout, no gradient tracking).
inline Matrix mlp_forward(const MlpConfig& c, const Params& p, const Matrix& x) {
  Tape t(false);
  Rng unused(0);
  auto& mp = const_cast<Params&>(p);  // eval tapes never write parameters
  return mlp_forward(c, mp, t.constant(x), false, unused).value();
}

inline Matrix gcn_forward(const GcnConfig& c, const Params& p, const NormAdj& adj, const Matrix& x) {
  Tape t(false);
  Rng unused(0);
  auto& mp = const_cast<Params&>(p);
  return gcn_forward(c, mp, adj, t.constant(x), false, unused).value();
}

/// Dot-product link decoder: logit(u, v) = <z_u, z_v>.
inline std::vector<double> link_logits(const Matrix& z, std::span<const Edge> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [u, v] : pairs) {
    if (u >= z.rows() || v >= z.rows()) {
      throw ParameterError("link_logits: pair (" + std::to_string(u) + "," + std::to_string(v) + ") out of range");
    }
    out.push_back(z.row(u).dot(z.row(v)));
  }
  return out;
}

/// An encoder (MLP or GCN) with its parameters.
struct Model {
  ModelKind kind = ModelKind::kMlp;
  MlpConfig mlp;
  GcnConfig gcn;
  Params params;

  Var forward(Tape& t, Var x, const NormAdj* adj, bool train, Rng& rng) {
    if (kind == ModelKind::kMlp) return mlp_forward(mlp, params, x, train, rng);
    if (!adj) throw ParameterError("gcn: forward requires an adjacency");
    return gcn_forward(gcn, params, *adj, x, train, rng);
  }

  Matrix embed(const Matrix& x, const NormAdj* adj) {
    Tape t(false);
    Rng unused(0);
    return forward(t, t.constant(x), adj, false, unused).value();
  }
};

}  // namespace gnb
