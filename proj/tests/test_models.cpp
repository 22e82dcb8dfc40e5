#include <gtest/gtest.h>

#include <numeric>

#include "gnb/models.hpp"
#include "oracles.hpp"

using namespace gnb;
using namespace gnb::testing;
using gnb::testing::path_graph;
using gnb::testing::random_graph;

namespace {

Graph relabel(const Graph& g, const std::vector<NodeId>& perm) {
  std::vector<Edge> edges;
  for (const auto& e : g.edges()) edges.push_back(canonical({perm[e.u], perm[e.v]}));
  return Graph(g.num_nodes(), edges);
}

Matrix permute_rows(const Matrix& x, const std::vector<NodeId>& perm) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(perm[static_cast<std::size_t>(i)]) = x.row(i);
  return out;
}

std::vector<NodeId> random_perm(std::size_t n, std::uint64_t seed) {
  std::vector<NodeId> p(n);
  std::iota(p.begin(), p.end(), 0);
  Rng rng(seed, 21);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

// Link-prediction loss on a fixed set of pairs, as used in training.
struct LinkLoss {
  std::vector<Edge> pairs;
  std::vector<double> labels;
};

LinkLoss make_pairs(std::size_t n, std::uint64_t seed) {
  LinkLoss l;
  Rng rng(seed, 33);
  for (int k = 0; k < 12; ++k) {
    const auto u = static_cast<NodeId>(rng.below(n));
    auto v = static_cast<NodeId>(rng.below(n));
    if (v == u) v = static_cast<NodeId>((u + 1) % n);
    l.pairs.push_back({u, v});
    l.labels.push_back(k % 2 ? 1.0 : 0.0);
  }
  return l;
}

}  // namespace

TEST(NormalizeAdjacency, SingleNode) {
  const auto a = normalize_adjacency(Graph(1, {}));
  EXPECT_EQ(a.to_dense(), Matrix::Ones(1, 1));
}

TEST(NormalizeAdjacency, SingleEdge) {
  const auto a = normalize_adjacency(Graph(2, {{0, 1}})).to_dense();
  EXPECT_DOUBLE_EQ(a(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(a(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(a(0, 0), 0.5);
}

TEST(NormalizeAdjacency, MatchesDenseOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = random_graph(5 + seed % 10, 0.3, seed);
    const Matrix sparse = normalize_adjacency(g).to_dense();
    EXPECT_LT((sparse - dense_norm_adj(g)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(sparse, sparse.transpose());
  }
}

TEST(NormalizeAdjacency, SparseProductsMatchDense) {
  const auto g = random_graph(12, 0.3, 4);
  const auto a = normalize_adjacency(g);
  const Matrix x = random_matrix(12, 3, 5);
  EXPECT_LT((a.multiply(x) - a.to_dense() * x).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((a.multiply_transposed(x) - a.to_dense().transpose() * x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mlp, NoHiddenLayersIsAffine) {
  MlpConfig c{.in_dim = 3, .hidden_dims = {}, .out_dim = 2};
  auto p = init_params(c, 1);
  p[1].value = Matrix{{0.5, -1.0}};
  const Matrix x = random_matrix(4, 3, 2);
  const Matrix expected = (x * p[0].value).rowwise() + p[1].value.row(0);
  EXPECT_LT((mlp_forward(c, p, x) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Mlp, HandComputedForward) {
  MlpConfig c{.in_dim = 3, .hidden_dims = {2}, .out_dim = 1};
  Params p;
  p.emplace_back(Matrix{{1, 0}, {0, 1}, {1, -1}});
  p.emplace_back(Matrix{{0, -1}});
  p.emplace_back(Matrix{{2}, {3}});
  p.emplace_back(Matrix{{1}});
  const Matrix x{{1, 2, 3}, {-1, 0, 1}};
  // row 0: h = [1+3, 2-3] + [0,-1] = [4, -2] -> relu [4, 0] -> 8 + 1 = 9
  // row 1: h = [-1+1, 0-1] + [0,-1] = [0, -2] -> relu [0, 0] -> 0 + 1 = 1
  EXPECT_EQ(mlp_forward(c, p, x), (Matrix{{9}, {1}}));
}

TEST(Mlp, RowPermutationEquivariance) {
  MlpConfig c{.in_dim = 4, .hidden_dims = {8, 8}, .out_dim = 3};
  const auto p = init_params(c, 3);
  const Matrix x = random_matrix(10, 4, 4);
  const auto perm = random_perm(10, 5);
  EXPECT_LT((mlp_forward(c, p, permute_rows(x, perm)) - permute_rows(mlp_forward(c, p, x), perm)).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(Mlp, ShapeMismatch) {
  MlpConfig c{.in_dim = 4, .hidden_dims = {8}, .out_dim = 3};
  const auto p = init_params(c, 3);
  EXPECT_THROW(mlp_forward(c, p, Matrix::Ones(2, 5)), ShapeError);
  auto q = p;
  q.pop_back();
  EXPECT_THROW(mlp_forward(c, q, Matrix::Ones(2, 4)), ShapeError);
  c.dropout = 1.0;
  EXPECT_THROW(init_params(c, 1), ParameterError);
}

TEST(Mlp, GlorotRange) {
  MlpConfig c{.in_dim = 30, .hidden_dims = {20}, .out_dim = 10};
  const auto p = init_params(c, 7);
  EXPECT_LE(p[0].value.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 50));
  EXPECT_LE(p[2].value.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 30));
  EXPECT_EQ(p[1].value, Matrix::Zero(1, 20));
  EXPECT_EQ(init_params(c, 7)[0].value, p[0].value);
  EXPECT_NE(init_params(c, 8)[0].value, p[0].value);
}

TEST(Gcn, HandComputedPathForward) {
  // Path 0-1-2 with self loops: degrees 2, 3, 2.
  GcnConfig c{.in_dim = 1, .hidden_dim = 4, .out_dim = 1, .num_layers = 1};
  Params p;
  p.emplace_back(Matrix{{2.0}});
  p.emplace_back(Matrix{{0.5}});
  const Matrix x{{1}, {2}, {3}};
  const auto adj = normalize_adjacency(path_graph(3));
  const double r2 = std::sqrt(2.0), r3 = std::sqrt(3.0), r6 = std::sqrt(6.0);
  // h = A_hat (x W) + b with x W = [2, 4, 6]
  Matrix expected(3, 1);
  expected << 2.0 / 2 + 4.0 / r6 + 0.5, 2.0 / r6 + 4.0 / 3 + 6.0 / r6 + 0.5, 4.0 / r6 + 6.0 / 2 + 0.5;
  (void)r2;
  (void)r3;
  EXPECT_LT((gcn_forward(c, p, adj, x) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Gcn, EmptyGraphEqualsMlp) {
  for (std::size_t layers : {1u, 2u, 3u}) {
    GcnConfig g{.in_dim = 5, .hidden_dim = 7, .out_dim = 3, .num_layers = layers};
    MlpConfig m{.in_dim = 5, .hidden_dims = std::vector<std::size_t>(layers - 1, 7), .out_dim = 3};
    const auto p = init_params(g, 9);
    const Matrix x = random_matrix(8, 5, 10);
    const auto adj = normalize_adjacency(Graph(8, {}));
    EXPECT_LT((gcn_forward(g, p, adj, x) - mlp_forward(m, p, x)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Gcn, PermutationEquivariance) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = random_graph(15, 0.25, seed);
    GcnConfig c{.in_dim = 4, .hidden_dim = 6, .out_dim = 3, .num_layers = 2};
    const auto p = init_params(c, seed);
    const Matrix x = random_matrix(15, 4, seed + 50);
    const auto perm = random_perm(15, seed);
    const Matrix a = gcn_forward(c, p, normalize_adjacency(relabel(g, perm)), permute_rows(x, perm));
    const Matrix b = permute_rows(gcn_forward(c, p, normalize_adjacency(g), x), perm);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Gcn, AdjacencySizeMismatch) {
  GcnConfig c{.in_dim = 2, .hidden_dim = 3, .out_dim = 1};
  const auto p = init_params(c, 1);
  EXPECT_THROW(gcn_forward(c, p, normalize_adjacency(Graph(4, {})), Matrix::Ones(5, 2)), ShapeError);
  c.num_layers = 0;
  EXPECT_THROW(validate(c), ParameterError);
}

TEST(LinkLogits, UnitAndOrthogonal) {
  const Matrix z{{1, 0}, {1, 0}, {0, 1}};
  const std::vector<Edge> pairs{{0, 1}, {0, 2}, {2, 0}};
  EXPECT_EQ(link_logits(z, pairs), (std::vector<double>{1.0, 0.0, 0.0}));
  const std::vector<Edge> bad{{0, 3}};
  EXPECT_THROW(link_logits(z, bad), ParameterError);
}

TEST(LinkLogits, MatchesDotProductAndSymmetric) {
  const Matrix z = random_matrix(4, 3, 6);
  const std::vector<Edge> pairs{{0, 1}, {1, 2}, {2, 3}, {0, 3}, {1, 1}};
  const auto out = link_logits(z, pairs);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    double d = 0;
    for (int j = 0; j < 3; ++j) d += z(pairs[k].u, j) * z(pairs[k].v, j);
    EXPECT_NEAR(out[k], d, 1e-15);
    const std::vector<Edge> rev{{pairs[k].v, pairs[k].u}};
    EXPECT_EQ(link_logits(z, rev)[0], out[k]);
  }
  Tape t(false);
  const Matrix tape_out = pair_dot(t.constant(z), pairs).value();
  for (std::size_t k = 0; k < pairs.size(); ++k) EXPECT_EQ(tape_out(static_cast<Eigen::Index>(k), 0), out[k]);
}

TEST(GradientCheck, MlpLinkLoss) {
  MlpConfig c{.in_dim = 6, .hidden_dims = {8}, .out_dim = 4};
  auto p = init_params(c, 1);
  const Matrix x = random_matrix(10, 6, 2);
  const auto task = make_pairs(10, 3);
  const double err = gradient_check(p, [&](Tape& t) {
    Rng rng(0);
    auto z = mlp_forward(c, p, t.constant(x), false, rng);
    return bce_with_logits(pair_dot(z, task.pairs), task.labels);
  });
  EXPECT_LT(err, 1e-5);
}

TEST(GradientCheck, GcnLinkLoss) {
  GcnConfig c{.in_dim = 6, .hidden_dim = 8, .out_dim = 4, .num_layers = 2};
  auto p = init_params(c, 1);
  const auto adj = normalize_adjacency(random_graph(10, 0.3, 4));
  const Matrix x = random_matrix(10, 6, 2);
  const auto task = make_pairs(10, 3);
  const double err = gradient_check(p, [&](Tape& t) {
    Rng rng(0);
    auto z = gcn_forward(c, p, adj, t.constant(x), false, rng);
    return bce_with_logits(pair_dot(z, task.pairs), task.labels);
  });
  EXPECT_LT(err, 1e-5);
}

TEST(GradientCheck, BothModelsTenSeedsWithDropout) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto e = model_gradient_errors(seed);
    EXPECT_LT(e.mlp, 1e-4) << "mlp seed " << seed;
    EXPECT_LT(e.gcn, 1e-4) << "gcn seed " << seed;
  }
}
