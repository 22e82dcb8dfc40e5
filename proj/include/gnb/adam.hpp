#pragma once

#include <cmath>
#include <vector>

#include "gnb/error.hpp"
#include "gnb/tensor.hpp"

namespace gnb {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // L2 term added to the gradient
  long long t = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
};

/// One bias-corrected Adam update using the gradients held in each tensor.
inline void adam_step(std::vector<Tensor2>& params, AdamState& s) {
  if (s.m.empty()) {
    for (const auto& p : params) {
      s.m.push_back(Matrix::Zero(p.rows(), p.cols()));
      s.v.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
  }
  if (s.m.size() != params.size()) throw ShapeError("adam_step: optimizer state does not match parameters");
  ++s.t;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    if (p.grad.rows() != p.rows() || p.grad.cols() != p.cols() || s.m[i].rows() != p.rows() ||
        s.m[i].cols() != p.cols()) {
      throw ShapeError("adam_step: gradient shape mismatch for parameter " + std::to_string(i));
    }
    Matrix g = p.grad;
    if (s.weight_decay != 0.0) g += s.weight_decay * p.value;
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * g;
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * g.cwiseProduct(g);
    p.value.array() -= s.lr * (s.m[i].array() / bc1) / ((s.v[i].array() / bc2).sqrt() + s.eps);
  }
}

}  // namespace gnb
