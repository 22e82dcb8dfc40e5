#pragma once

#include <Eigen/Core>
#include <charconv>
#include <cmath>
#include <string>

namespace gnb {

/// Dense row-major 64-bit matrix used for features, activations and weights.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// A trainable tensor: value plus a same-shape gradient accumulator.
struct Tensor2 {
  Matrix value;
  Matrix grad;

  Tensor2() = default;
  explicit Tensor2(Matrix v) : value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}

  Eigen::Index rows() const { return value.rows(); }
  Eigen::Index cols() const { return value.cols(); }
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace gnb
