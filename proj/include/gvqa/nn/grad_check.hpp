#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "gvqa/nn/tensor.hpp"

namespace gvqa::nn {

// A differentiable scalar function built on a fresh tape from one input leaf.
using ScalarFn = std::function<Tensor(Tape&, Tensor)>;

// Central finite differences against reverse-mode gradients. Returns the max
// over coordinates of |g_ad - g_fd| / max(1e-8, |g_fd|).
inline double grad_check(const ScalarFn& fn, const Shape& shape,
                         const std::vector<double>& point, double eps = 1e-5) {
  if (eps <= 0.0) throw std::invalid_argument("grad_check: eps must be positive");
  std::vector<double> g_ad;
  {
    Tape tape;
    Tensor x = tape.leaf(shape, point, true);
    Tensor loss = fn(tape, x);
    if (loss.size() != 1) throw std::invalid_argument("grad_check: function must be scalar");
    tape.backward(loss);
    g_ad = x.grad();
  }
  auto eval = [&](const std::vector<double>& p) {
    Tape tape;
    Tensor x = tape.leaf(shape, p, false);
    Tensor loss = fn(tape, x);
    return loss.val()[0];
  };
  double worst = 0.0;
  std::vector<double> p = point;
  for (size_t i = 0; i < point.size(); ++i) {
    p[i] = point[i] + eps;
    double hi = eval(p);
    p[i] = point[i] - eps;
    double lo = eval(p);
    p[i] = point[i];
    double g_fd = (hi - lo) / (2.0 * eps);
    double rel = std::abs(g_ad[i] - g_fd) / std::max(1e-8, std::abs(g_fd));
    worst = std::max(worst, rel);
  }
  return worst;
}

// Same check for a model parameter: `forward` evaluates the scalar loss with
// the parameter's current storage, using tape.param(p) so AD grads land in
// p.grad.
inline double grad_check_param(const std::function<double(bool record_grad)>& forward,
                               Param& p, double eps = 1e-5) {
  p.zero_grad();
  forward(true);
  std::vector<double> g_ad = p.grad;
  double worst = 0.0;
  for (size_t i = 0; i < p.value.size(); ++i) {
    double keep = p.value[i];
    p.value[i] = keep + eps;
    double hi = forward(false);
    p.value[i] = keep - eps;
    double lo = forward(false);
    p.value[i] = keep;
    double g_fd = (hi - lo) / (2.0 * eps);
    double rel = std::abs(g_ad[i] - g_fd) / std::max(1e-8, std::abs(g_fd));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace gvqa::nn
