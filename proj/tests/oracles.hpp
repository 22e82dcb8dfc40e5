#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance checks.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "gnb/autodiff.hpp"
#include "gnb/features.hpp"
#include "gnb/graph.hpp"
#include "gnb/models.hpp"
#include "gnb/rng.hpp"
#include "test_util.hpp"

namespace gnb::testing {

inline Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng(seed, 17);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// All-pairs shortest paths (Floyd-Warshall) over hop counts.
inline std::vector<std::vector<std::uint64_t>> floyd_warshall(const Graph& g) {
  const std::uint64_t inf = std::numeric_limits<std::uint32_t>::max();
  const std::size_t n = g.num_nodes();
  std::vector<std::vector<std::uint64_t>> d(n, std::vector<std::uint64_t>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& e : g.edges()) d[e.u][e.v] = d[e.v][e.u] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

// Dense D^-1/2 (A + I) D^-1/2.
inline Matrix dense_norm_adj(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Matrix a = Matrix::Identity(n, n);
  for (const auto& e : g.edges()) a(e.u, e.v) = a(e.v, e.u) = 1.0;
  const Eigen::VectorXd d = a.rowwise().sum();
  const Eigen::VectorXd s = d.cwiseSqrt().cwiseInverse();
  return s.asDiagonal() * a * s.asDiagonal();
}

// Pair-counting definition: P(score_pos > score_neg) + 0.5 P(tie).
inline double brute_force_auc(const std::vector<double>& s, const std::vector<double>& y) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1.0) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0.0) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

// Biases start at zero, which puts dropped-out rows exactly on the ReLU kink;
// move them off it so central differences see a smooth function.
inline void jitter_biases(Params& params, std::uint64_t seed) {
  Rng rng(seed, 99);
  for (std::size_t i = 1; i < params.size(); i += 2) {
    for (Eigen::Index j = 0; j < params[i].value.size(); ++j) params[i].value.data()[j] = 0.1 * rng.normal();
  }
}

// Max over tensors of ||analytic - numeric||_inf / max(||analytic||_inf, ||numeric||_inf).
template <typename LossFn>
double gradient_check(Params& params, LossFn loss) {
  jitter_biases(params, params.size());
  for (auto& p : params) p.zero_grad();
  {
    Tape t;
    backward(loss(t));
  }
  const double h = 1e-6;
  double worst = 0.0;
  for (auto& p : params) {
    Matrix numeric(p.rows(), p.cols());
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      const double orig = p.value.data()[i];
      p.value.data()[i] = orig + h;
      Tape a(false);
      const double fp = loss(a).value()(0, 0);
      p.value.data()[i] = orig - h;
      Tape b(false);
      const double fm = loss(b).value()(0, 0);
      p.value.data()[i] = orig;
      numeric.data()[i] = (fp - fm) / (2 * h);
    }
    const double scale = std::max({p.grad.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff(), 1e-12});
    worst = std::max(worst, (p.grad - numeric).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

// Worst relative gradient error of the MLP and of the GCN under
// cross-entropy with dropout, on a random problem drawn from `seed`.
struct GradientErrors {
  double mlp = 0.0;
  double gcn = 0.0;
};

inline GradientErrors model_gradient_errors(std::uint64_t seed) {
  Rng shape(seed, 77);
  const std::size_t n = 5 + shape.below(16);
  const std::size_t d = 2 + shape.below(7);
  const Matrix x = random_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d), seed);
  std::vector<std::uint32_t> labels(n);
  for (auto& l : labels) l = static_cast<std::uint32_t>(shape.below(3));
  const auto adj = normalize_adjacency(random_graph(n, 0.3, seed));

  GradientErrors e;
  MlpConfig mc{.in_dim = d, .hidden_dims = {5, 4}, .out_dim = 3, .dropout = 0.3};
  auto mp = init_params(mc, seed);
  e.mlp = gradient_check(mp, [&](Tape& t) {
    Rng mask(seed, 5);  // same dropout mask on every evaluation
    return softmax_cross_entropy(mlp_forward(mc, mp, t.constant(x), true, mask), labels);
  });
  GcnConfig gc{.in_dim = d, .hidden_dim = 5, .out_dim = 3, .num_layers = 2 + seed % 2, .dropout = 0.3};
  auto gp = init_params(gc, seed);
  e.gcn = gradient_check(gp, [&](Tape& t) {
    Rng mask(seed, 5);
    return softmax_cross_entropy(gcn_forward(gc, gp, adj, t.constant(x), true, mask), labels);
  });
  return e;
}

// Monte-Carlo variance of each node's coordinates on a path rooted at node 0.
inline std::vector<double> path_variances(double gamma, double nu, std::size_t length, std::size_t reps,
                                          std::size_t dim) {
  const Graph g = path_graph(length);
  std::vector<double> sum(length, 0), sq(length, 0);
  for (std::size_t r = 0; r < reps; ++r) {
    SynthParams p;
    p.dist.dim = dim;
    p.root = 0;
    p.gamma = gamma;
    p.nu = nu;
    p.seed = 1000 + r;
    const auto f = synthesize_parametric(g, p);
    for (std::size_t v = 0; v < length; ++v) {
      for (std::size_t c = 0; c < dim; ++c) {
        sum[v] += f.data(v, c);
        sq[v] += f.data(v, c) * f.data(v, c);
      }
    }
  }
  std::vector<double> var(length);
  const double n = static_cast<double>(reps * dim);
  for (std::size_t v = 0; v < length; ++v) var[v] = sq[v] / n - (sum[v] / n) * (sum[v] / n);
  return var;
}

}  // namespace gnb::testing
