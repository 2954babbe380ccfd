#pragma once

#include <cmath>
#include <unordered_map>
#include <vector>

#include "gvqa/nn/tensor.hpp"

namespace gvqa::nn {

class Adam {
 public:
  explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<Param*>& params) {
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, t_);
    double bc2 = 1.0 - std::pow(beta2_, t_);
    for (Param* p : params) {
      State& s = state_[p];
      if (s.m.size() != p->value.size()) {
        s.m.assign(p->value.size(), 0.0);
        s.v.assign(p->value.size(), 0.0);
      }
      for (size_t i = 0; i < p->value.size(); ++i) {
        double g = p->grad[i];
        s.m[i] = beta1_ * s.m[i] + (1.0 - beta1_) * g;
        s.v[i] = beta2_ * s.v[i] + (1.0 - beta2_) * g * g;
        double mhat = s.m[i] / bc1;
        double vhat = s.v[i] / bc2;
        p->value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  struct State {
    std::vector<double> m, v;
  };
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::unordered_map<Param*, State> state_;
};

}  // namespace gvqa::nn
