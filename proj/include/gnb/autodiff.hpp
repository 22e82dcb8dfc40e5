#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gnb/error.hpp"
#include "gnb/graph.hpp"
#include "gnb/rng.hpp"
#include "gnb/tensor.hpp"

namespace gnb {

class Tape;

/// Handle to a node recorded on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Matrix& value() const;
  const Matrix& grad() const;
  bool requires_grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records a forward computation and replays it in reverse. Nodes are
/// appended in evaluation order, so the node list is already topologically
/// sorted. With grad tracking off, nothing is retained for backward.
class Tape {
 public:
  explicit Tape(bool track_grads = true) : track_(track_grads) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool tracking() const { return track_; }

  // Borrowed input that never receives a gradient. Must outlive the tape.
  Var constant(const Matrix& m) { return push(&m, nullptr, false); }
  Var constant(Matrix&& m) {
    Node n;
    n.owned = std::move(m);
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
  }
  // Leaf bound to a trainable tensor; backward() accumulates into p.grad.
  Var parameter(Tensor2& p) { return push(&p.value, &p, track_); }

  const Matrix& value(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.ref ? *n.ref : n.owned;
  }
  const Matrix& grad(std::size_t id) const { return nodes_[id].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Adds g into the gradient buffer of node id (no-op when it needs none).
  template <typename Expr>
  void accumulate(std::size_t id, const Expr& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

  Var record(Matrix value, bool requires_grad, std::function<void(Tape&, const Matrix&)> backward) {
    Node n;
    n.owned = std::move(value);
    n.requires_grad = track_ && requires_grad;
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
  }

  /// Reverse sweep from a scalar (1x1) node.
  void backward(Var loss) {
    if (!loss.valid() || loss.tape() != this || loss.id() >= nodes_.size()) {
      throw StateError("backward: no recorded forward pass for this value");
    }
    if (!track_) throw StateError("backward: tape was recorded without gradient tracking");
    if (done_) throw StateError("backward: tape already consumed");
    const Matrix& out = value(loss.id());
    if (out.rows() != 1 || out.cols() != 1) throw ShapeError("backward: loss must be a 1x1 scalar");
    done_ = true;
    if (!nodes_[loss.id()].requires_grad) return;
    nodes_[loss.id()].grad = Matrix::Ones(1, 1);
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.requires_grad || n.grad.size() == 0) continue;
      if (n.backward) n.backward(*this, n.grad);
      if (n.param) {
        if (n.param->grad.rows() != n.grad.rows() || n.param->grad.cols() != n.grad.cols()) {
          n.param->grad = n.grad;
        } else {
          n.param->grad += n.grad;
        }
      }
    }
  }

 private:
  struct Node {
    Matrix owned;
    const Matrix* ref = nullptr;
    Tensor2* param = nullptr;
    Matrix grad;
    bool requires_grad = false;
    std::function<void(Tape&, const Matrix&)> backward;
  };

  Var push(const Matrix* ref, Tensor2* param, bool requires_grad) {
    Node n;
    n.ref = ref;
    n.param = param;
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
  bool track_;
  bool done_ = false;
};

inline const Matrix& Var::value() const {
  if (!tape_) throw StateError("value of an unrecorded Var");
  return tape_->value(id_);
}
inline const Matrix& Var::grad() const { return tape_->grad(id_); }
inline bool Var::requires_grad() const { return tape_->requires_grad(id_); }

inline void backward(Var loss) {
  if (!loss.valid()) throw StateError("backward: no recorded forward pass for this value");
  loss.tape()->backward(loss);
}

namespace detail {
inline Tape& same_tape(Var a, Var b, const char* op) {
  if (!a.valid() || !b.valid() || a.tape() != b.tape()) {
    throw StateError(std::string(op) + ": operands are not on the same tape");
  }
  return *a.tape();
}
inline void check_shape(bool ok, const char* op, const std::string& detail) {
  if (!ok) throw ShapeError(std::string(op) + ": " + detail);
}
inline std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}
}  // namespace detail

// ---- elementwise / linear algebra ------------------------------------------

inline Var matmul(Var a, Var b) {
  Tape& t = detail::same_tape(a, b, "matmul");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  detail::check_shape(av.cols() == bv.rows(), "matmul", detail::dims(av) + " * " + detail::dims(bv));
  Matrix out;
  out.noalias() = av * bv;
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), a.requires_grad() || b.requires_grad(),
                  [ia, ib](Tape& tp, const Matrix& g) {
                    if (tp.requires_grad(ia)) {
                      Matrix ga;
                      ga.noalias() = g * tp.value(ib).transpose();
                      tp.accumulate(ia, ga);
                    }
                    if (tp.requires_grad(ib)) {
                      Matrix gb;
                      gb.noalias() = tp.value(ia).transpose() * g;
                      tp.accumulate(ib, gb);
                    }
                  });
}

// a + broadcast(bias), bias is 1 x cols.
inline Var add_row(Var a, Var bias) {
  Tape& t = detail::same_tape(a, bias, "add_row");
  const Matrix& av = a.value();
  const Matrix& bv = bias.value();
  detail::check_shape(bv.rows() == 1 && bv.cols() == av.cols(), "add_row",
                      detail::dims(av) + " + " + detail::dims(bv));
  Matrix out = av;
  out.rowwise() += bv.row(0);
  const std::size_t ia = a.id(), ib = bias.id();
  return t.record(std::move(out), a.requires_grad() || bias.requires_grad(),
                  [ia, ib](Tape& tp, const Matrix& g) {
                    tp.accumulate(ia, g);
                    if (tp.requires_grad(ib)) tp.accumulate(ib, Matrix(g.colwise().sum()));
                  });
}

inline Var add(Var a, Var b) {
  Tape& t = detail::same_tape(a, b, "add");
  detail::check_shape(a.rows() == b.rows() && a.cols() == b.cols(), "add",
                      detail::dims(a.value()) + " + " + detail::dims(b.value()));
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(a.value() + b.value(), a.requires_grad() || b.requires_grad(),
                  [ia, ib](Tape& tp, const Matrix& g) {
                    tp.accumulate(ia, g);
                    tp.accumulate(ib, g);
                  });
}

inline Var mul(Var a, Var b) {
  Tape& t = detail::same_tape(a, b, "mul");
  detail::check_shape(a.rows() == b.rows() && a.cols() == b.cols(), "mul",
                      detail::dims(a.value()) + " .* " + detail::dims(b.value()));
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(a.value().cwiseProduct(b.value()), a.requires_grad() || b.requires_grad(),
                  [ia, ib](Tape& tp, const Matrix& g) {
                    if (tp.requires_grad(ia)) tp.accumulate(ia, Matrix(g.cwiseProduct(tp.value(ib))));
                    if (tp.requires_grad(ib)) tp.accumulate(ib, Matrix(g.cwiseProduct(tp.value(ia))));
                  });
}

inline Var sum(Var a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  const Eigen::Index r = a.rows(), c = a.cols();
  return t.record(Matrix::Constant(1, 1, a.value().sum()), a.requires_grad(),
                  [ia, r, c](Tape& tp, const Matrix& g) { tp.accumulate(ia, Matrix::Constant(r, c, g(0, 0))); });
}

inline Var relu(Var a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  return t.record(a.value().cwiseMax(0.0), a.requires_grad(), [ia](Tape& tp, const Matrix& g) {
    const Matrix& x = tp.value(ia);
    tp.accumulate(ia, Matrix((x.array() > 0.0).select(g, 0.0)));
  });
}

/// Inverted dropout: keeps each entry with probability 1-p and rescales by 1/(1-p).
inline Var dropout(Var a, double p, Rng& rng) {
  if (p <= 0.0) return a;
  if (p >= 1.0) throw ParameterError("dropout: probability must be < 1");
  Tape& t = *a.tape();
  const double scale = 1.0 / (1.0 - p);
  Matrix mask(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng.uniform() < p ? 0.0 : scale;
  Matrix out = a.value().cwiseProduct(mask);
  const std::size_t ia = a.id();
  return t.record(std::move(out), a.requires_grad(),
                  [ia, mask = std::move(mask)](Tape& tp, const Matrix& g) {
                    tp.accumulate(ia, Matrix(g.cwiseProduct(mask)));
                  });
}

inline Var gather_rows(Var a, std::span<const NodeId> rows) {
  Tape& t = *a.tape();
  const Matrix& av = a.value();
  Matrix out(static_cast<Eigen::Index>(rows.size()), av.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= av.rows()) throw ParameterError("gather_rows: row id out of range");
    out.row(static_cast<Eigen::Index>(i)) = av.row(rows[i]);
  }
  const std::size_t ia = a.id();
  const Eigen::Index r = av.rows();
  std::vector<NodeId> ids(rows.begin(), rows.end());
  return t.record(std::move(out), a.requires_grad(), [ia, r, ids = std::move(ids)](Tape& tp, const Matrix& g) {
    Matrix ga = Matrix::Zero(r, g.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) ga.row(ids[i]) += g.row(static_cast<Eigen::Index>(i));
    tp.accumulate(ia, ga);
  });
}

// ---- sparse propagation ----------------------------------------------------

/// Square CSR matrix with explicit values.
struct SparseCsr {
  std::size_t n = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<NodeId> cols;
  std::vector<double> values;

  Matrix multiply(const Matrix& x) const {
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
        out.row(static_cast<Eigen::Index>(i)) += values[k] * x.row(cols[k]);
      }
    }
    return out;
  }
  // A^T x
  Matrix multiply_transposed(const Matrix& x) const {
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
        out.row(cols[k]) += values[k] * x.row(static_cast<Eigen::Index>(i));
      }
    }
    return out;
  }
  Matrix to_dense() const {
    Matrix d = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) d(static_cast<Eigen::Index>(i), cols[k]) = values[k];
    }
    return d;
  }
};

// The sparse matrix must outlive the tape.
inline Var spmm(const SparseCsr& adj, Var x) {
  Tape& t = *x.tape();
  detail::check_shape(static_cast<std::size_t>(x.rows()) == adj.n, "spmm",
                      std::to_string(adj.n) + "x" + std::to_string(adj.n) + " * " + detail::dims(x.value()));
  const std::size_t ix = x.id();
  const SparseCsr* a = &adj;
  return t.record(adj.multiply(x.value()), x.requires_grad(),
                  [ix, a](Tape& tp, const Matrix& g) { tp.accumulate(ix, a->multiply_transposed(g)); });
}

// ---- link decoder ----------------------------------------------------------

/// Column of inner products <z_u, z_v>, one per pair.
inline Var pair_dot(Var z, std::span<const Edge> pairs) {
  Tape& t = *z.tape();
  const Matrix& zv = z.value();
  Matrix out(static_cast<Eigen::Index>(pairs.size()), 1);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [u, v] = pairs[k];
    if (u >= zv.rows() || v >= zv.rows()) {
      throw ParameterError("link_logits: pair (" + std::to_string(u) + "," + std::to_string(v) +
                           ") out of range for " + std::to_string(zv.rows()) + " embeddings");
    }
    out(static_cast<Eigen::Index>(k), 0) = zv.row(u).dot(zv.row(v));
  }
  const std::size_t iz = z.id();
  std::vector<Edge> ps(pairs.begin(), pairs.end());
  return t.record(std::move(out), z.requires_grad(), [iz, ps = std::move(ps)](Tape& tp, const Matrix& g) {
    const Matrix& zz = tp.value(iz);
    Matrix gz = Matrix::Zero(zz.rows(), zz.cols());
    for (std::size_t k = 0; k < ps.size(); ++k) {
      const double gk = g(static_cast<Eigen::Index>(k), 0);
      gz.row(ps[k].u) += gk * zz.row(ps[k].v);
      gz.row(ps[k].v) += gk * zz.row(ps[k].u);
    }
    tp.accumulate(iz, gz);
  });
}

// ---- losses ----------------------------------------------------------------

inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Mean binary cross-entropy on logits (column vector), labels in {0, 1}.
inline Var bce_with_logits(Var logits, std::span<const double> labels) {
  Tape& t = *logits.tape();
  const Matrix& x = logits.value();
  detail::check_shape(x.cols() == 1 && static_cast<std::size_t>(x.rows()) == labels.size() && !labels.empty(),
                      "bce_with_logits", detail::dims(x) + " vs " + std::to_string(labels.size()) + " labels");
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) throw ParameterError("bce_with_logits: label must be 0 or 1");
    const double xi = x(static_cast<Eigen::Index>(i), 0);
    total += softplus(xi) - labels[i] * xi;
  }
  const double n = static_cast<double>(labels.size());
  const std::size_t il = logits.id();
  std::vector<double> y(labels.begin(), labels.end());
  return t.record(Matrix::Constant(1, 1, total / n), logits.requires_grad(),
                  [il, n, y = std::move(y)](Tape& tp, const Matrix& g) {
                    const Matrix& xx = tp.value(il);
                    Matrix gx(xx.rows(), 1);
                    for (Eigen::Index i = 0; i < xx.rows(); ++i) {
                      gx(i, 0) = g(0, 0) * (sigmoid(xx(i, 0)) - y[static_cast<std::size_t>(i)]) / n;
                    }
                    tp.accumulate(il, gx);
                  });
}

/// Mean softmax cross-entropy; row i of logits is scored against labels[i].
inline Var softmax_cross_entropy(Var logits, std::span<const std::uint32_t> labels) {
  Tape& t = *logits.tape();
  const Matrix& x = logits.value();
  detail::check_shape(static_cast<std::size_t>(x.rows()) == labels.size() && !labels.empty() && x.cols() >= 1,
                      "softmax_cross_entropy", detail::dims(x) + " vs " + std::to_string(labels.size()) + " labels");
  Matrix probs(x.rows(), x.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto y = labels[static_cast<std::size_t>(i)];
    if (y >= x.cols()) throw ParameterError("softmax_cross_entropy: label " + std::to_string(y) + " out of range");
    const double mx = x.row(i).maxCoeff();
    const double lse = mx + std::log((x.row(i).array() - mx).exp().sum());
    total += lse - x(i, y);
    probs.row(i) = (x.row(i).array() - lse).exp();
  }
  const double n = static_cast<double>(labels.size());
  const std::size_t il = logits.id();
  std::vector<std::uint32_t> ys(labels.begin(), labels.end());
  return t.record(Matrix::Constant(1, 1, total / n), logits.requires_grad(),
                  [il, n, probs = std::move(probs), ys = std::move(ys)](Tape& tp, const Matrix& g) {
                    Matrix gx = probs;
                    for (std::size_t i = 0; i < ys.size(); ++i) gx(static_cast<Eigen::Index>(i), ys[i]) -= 1.0;
                    gx *= g(0, 0) / n;
                    tp.accumulate(il, gx);
                  });
}

}  // namespace gnb
