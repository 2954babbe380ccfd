#pragma once

// Dense double-precision tensors with reverse-mode differentiation on an
// explicit tape. Shapes are rank-1 or rank-2; no implicit broadcasting,
// mismatched shapes throw. Tapes record ops in creation order, which is
// already a topological order, so backward() is a single reverse sweep.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gvqa::nn {

using Shape = std::vector<int>;

inline int numel(const Shape& s) {
  int n = 1;
  for (int d : s) {
    if (d <= 0) throw std::invalid_argument("tensor dimensions must be positive");
    n *= d;
  }
  return n;
}

inline bool same_shape(const Shape& a, const Shape& b) { return a == b; }

// Learnable parameter. Plain storage that outlives any tape; gradients from
// backward() accumulate into grad until zero_grad().
struct Param {
  std::string name;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;

  Param() = default;
  Param(std::string n, Shape s) : name(std::move(n)), shape(std::move(s)) {
    value.assign(static_cast<size_t>(numel(shape)), 0.0);
    grad.assign(value.size(), 0.0);
  }
  int size() const { return static_cast<int>(value.size()); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

class Tape;

// Handle into a tape node. Cheap to copy, valid while the tape lives.
struct Tensor {
  Tape* tape = nullptr;
  int id = -1;

  const Shape& shape() const;
  const std::vector<double>& val() const;
  const std::vector<double>& grad() const;
  int size() const;
};

class Tape {
 public:
  struct Node {
    Shape shape;
    std::vector<double> val;
    std::vector<double> grad;
    bool requires_grad = false;
    Param* bound = nullptr;
    std::function<void()> back;  // adds this node's grad into its parents
  };

  Tensor leaf(Shape shape, std::vector<double> value, bool requires_grad = false) {
    if (static_cast<int>(value.size()) != numel(shape))
      throw std::invalid_argument("leaf: data length does not match shape");
    int id = make(std::move(shape), requires_grad);
    nodes_[id].val = std::move(value);
    return {this, id};
  }

  Tensor scalar(double v, bool requires_grad = false) { return leaf({1}, {v}, requires_grad); }

  Tensor param(Param& p) {
    Tensor t = leaf(p.shape, p.value, true);
    nodes_[t.id].bound = &p;
    return t;
  }

  Node& node(int id) { return nodes_[static_cast<size_t>(id)]; }
  const Node& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
  int size() const { return static_cast<int>(nodes_.size()); }

  // Reverse accumulation from a scalar loss. One pass per tape unless reset.
  void backward(const Tensor& loss) {
    if (loss.tape != this) throw std::invalid_argument("backward: loss from another tape");
    if (numel(node(loss.id).shape) != 1)
      throw std::invalid_argument("backward: loss must be scalar");
    if (ran_backward_) throw std::logic_error("backward: tape already consumed; reset() first");
    ran_backward_ = true;
    node(loss.id).grad[0] = 1.0;
    for (int i = loss.id; i >= 0; --i) {
      Node& n = nodes_[static_cast<size_t>(i)];
      if (n.back && n.requires_grad) n.back();
      if (n.bound) {
        for (size_t j = 0; j < n.grad.size(); ++j) n.bound->grad[j] += n.grad[j];
      }
    }
  }

  void reset() {
    nodes_.clear();
    ran_backward_ = false;
  }

  int make(Shape shape, bool requires_grad) {
    Node n;
    n.shape = std::move(shape);
    size_t count = static_cast<size_t>(numel(n.shape));
    n.val.assign(count, 0.0);
    n.grad.assign(count, 0.0);
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

 private:
  std::deque<Node> nodes_;
  bool ran_backward_ = false;
};

inline const Shape& Tensor::shape() const { return tape->node(id).shape; }
inline const std::vector<double>& Tensor::val() const { return tape->node(id).val; }
inline const std::vector<double>& Tensor::grad() const { return tape->node(id).grad; }
inline int Tensor::size() const { return numel(shape()); }

namespace detail {

inline Tape* tape_of(const Tensor& a, const Tensor& b) {
  if (a.tape != b.tape) throw std::invalid_argument("operands recorded on different tapes");
  return a.tape;
}

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!same_shape(a.shape(), b.shape()))
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

}  // namespace detail

// ---- elementwise ----

inline Tensor add(Tensor a, Tensor b) {
  Tape* t = detail::tape_of(a, b);
  detail::check_same_shape(a, b, "add");
  int id = t->make(a.shape(), t->node(a.id).requires_grad || t->node(b.id).requires_grad);
  auto& out = t->node(id);
  const auto& av = a.val();
  const auto& bv = b.val();
  for (size_t i = 0; i < out.val.size(); ++i) out.val[i] = av[i] + bv[i];
  out.back = [t, id, a, b]() {
    const auto& g = t->node(id).grad;
    if (t->node(a.id).requires_grad) {
      auto& ga = t->node(a.id).grad;
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t->node(b.id).requires_grad) {
      auto& gb = t->node(b.id).grad;
      for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
    }
  };
  return {t, id};
}

inline Tensor sub(Tensor a, Tensor b) {
  Tape* t = detail::tape_of(a, b);
  detail::check_same_shape(a, b, "sub");
  int id = t->make(a.shape(), t->node(a.id).requires_grad || t->node(b.id).requires_grad);
  auto& out = t->node(id);
  for (size_t i = 0; i < out.val.size(); ++i) out.val[i] = a.val()[i] - b.val()[i];
  out.back = [t, id, a, b]() {
    const auto& g = t->node(id).grad;
    if (t->node(a.id).requires_grad) {
      auto& ga = t->node(a.id).grad;
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t->node(b.id).requires_grad) {
      auto& gb = t->node(b.id).grad;
      for (size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  };
  return {t, id};
}

inline Tensor mul(Tensor a, Tensor b) {
  Tape* t = detail::tape_of(a, b);
  detail::check_same_shape(a, b, "mul");
  int id = t->make(a.shape(), t->node(a.id).requires_grad || t->node(b.id).requires_grad);
  auto& out = t->node(id);
  for (size_t i = 0; i < out.val.size(); ++i) out.val[i] = a.val()[i] * b.val()[i];
  out.back = [t, id, a, b]() {
    const auto& g = t->node(id).grad;
    if (t->node(a.id).requires_grad) {
      auto& ga = t->node(a.id).grad;
      const auto& bv = t->node(b.id).val;
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t->node(b.id).requires_grad) {
      auto& gb = t->node(b.id).grad;
      const auto& av = t->node(a.id).val;
      for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  };
  return {t, id};
}

inline Tensor divt(Tensor a, Tensor b) {
  Tape* t = detail::tape_of(a, b);
  detail::check_same_shape(a, b, "div");
  int id = t->make(a.shape(), t->node(a.id).requires_grad || t->node(b.id).requires_grad);
  auto& out = t->node(id);
  for (size_t i = 0; i < out.val.size(); ++i) out.val[i] = a.val()[i] / b.val()[i];
  out.back = [t, id, a, b]() {
    const auto& g = t->node(id).grad;
    const auto& av = t->node(a.id).val;
    const auto& bv = t->node(b.id).val;
    if (t->node(a.id).requires_grad) {
      auto& ga = t->node(a.id).grad;
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / bv[i];
    }
    if (t->node(b.id).requires_grad) {
      auto& gb = t->node(b.id).grad;
      for (size_t i = 0; i < g.size(); ++i) gb[i] -= g[i] * av[i] / (bv[i] * bv[i]);
    }
  };
  return {t, id};
}

// y = k*x + c, scalar constants.
inline Tensor affine(Tensor x, double k, double c) {
  Tape* t = x.tape;
  int id = t->make(x.shape(), t->node(x.id).requires_grad);
  auto& out = t->node(id);
  for (size_t i = 0; i < out.val.size(); ++i) out.val[i] = k * x.val()[i] + c;
  out.back = [t, id, x, k]() {
    if (!t->node(x.id).requires_grad) return;
    const auto& g = t->node(id).grad;
    auto& gx = t->node(x.id).grad;
    for (size_t i = 0; i < g.size(); ++i) gx[i] += k * g[i];
  };
  return {t, id};
}

inline Tensor relu(Tensor x) {
  Tape* t = x.tape;
  int id = t->make(x.shape(), t->node(x.id).requires_grad);
  auto& out = t->node(id);
  for (size_t i = 0; i < out.val.size(); ++i) out.val[i] = std::max(0.0, x.val()[i]);
  out.back = [t, id, x]() {
    if (!t->node(x.id).requires_grad) return;
    const auto& g = t->node(id).grad;
    const auto& xv = t->node(x.id).val;
    auto& gx = t->node(x.id).grad;
    for (size_t i = 0; i < g.size(); ++i)
      if (xv[i] > 0.0) gx[i] += g[i];
  };
  return {t, id};
}

inline Tensor sigmoid(Tensor x) {
  Tape* t = x.tape;
  int id = t->make(x.shape(), t->node(x.id).requires_grad);
  auto& out = t->node(id);
  for (size_t i = 0; i < out.val.size(); ++i) out.val[i] = 1.0 / (1.0 + std::exp(-x.val()[i]));
  out.back = [t, id, x]() {
    if (!t->node(x.id).requires_grad) return;
    const auto& g = t->node(id).grad;
    const auto& yv = t->node(id).val;
    auto& gx = t->node(x.id).grad;
    for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * yv[i] * (1.0 - yv[i]);
  };
  return {t, id};
}

// Elementwise min/max; ties route the gradient to the first argument.
inline Tensor emin(Tensor a, Tensor b) {
  Tape* t = detail::tape_of(a, b);
  detail::check_same_shape(a, b, "emin");
  int id = t->make(a.shape(), t->node(a.id).requires_grad || t->node(b.id).requires_grad);
  auto& out = t->node(id);
  for (size_t i = 0; i < out.val.size(); ++i) out.val[i] = std::min(a.val()[i], b.val()[i]);
  out.back = [t, id, a, b]() {
    const auto& g = t->node(id).grad;
    const auto& av = t->node(a.id).val;
    const auto& bv = t->node(b.id).val;
    for (size_t i = 0; i < g.size(); ++i) {
      if (av[i] <= bv[i]) {
        if (t->node(a.id).requires_grad) t->node(a.id).grad[i] += g[i];
      } else if (t->node(b.id).requires_grad) {
        t->node(b.id).grad[i] += g[i];
      }
    }
  };
  return {t, id};
}

inline Tensor emax(Tensor a, Tensor b) {
  Tape* t = detail::tape_of(a, b);
  detail::check_same_shape(a, b, "emax");
  int id = t->make(a.shape(), t->node(a.id).requires_grad || t->node(b.id).requires_grad);
  auto& out = t->node(id);
  for (size_t i = 0; i < out.val.size(); ++i) out.val[i] = std::max(a.val()[i], b.val()[i]);
  out.back = [t, id, a, b]() {
    const auto& g = t->node(id).grad;
    const auto& av = t->node(a.id).val;
    const auto& bv = t->node(b.id).val;
    for (size_t i = 0; i < g.size(); ++i) {
      if (av[i] >= bv[i]) {
        if (t->node(a.id).requires_grad) t->node(a.id).grad[i] += g[i];
      } else if (t->node(b.id).requires_grad) {
        t->node(b.id).grad[i] += g[i];
      }
    }
  };
  return {t, id};
}

// ---- linear algebra ----

inline Tensor matmul(Tensor a, Tensor b) {
  Tape* t = detail::tape_of(a, b);
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0])
    throw std::invalid_argument("matmul: incompatible shapes");
  int m = sa[0], k = sa[1], n = sb[1];
  int id = t->make({m, n}, t->node(a.id).requires_grad || t->node(b.id).requires_grad);
  auto& out = t->node(id);
  const double* A = a.val().data();
  const double* B = b.val().data();
  double* C = out.val.data();
  for (int i = 0; i < m; ++i)
    for (int p = 0; p < k; ++p) {
      double av = A[i * k + p];
      if (av == 0.0) continue;
      const double* Bp = B + p * n;
      double* Ci = C + i * n;
      for (int j = 0; j < n; ++j) Ci[j] += av * Bp[j];
    }
  out.back = [t, id, a, b, m, k, n]() {
    const double* G = t->node(id).grad.data();
    if (t->node(a.id).requires_grad) {
      double* GA = t->node(a.id).grad.data();
      const double* B = t->node(b.id).val.data();
      for (int i = 0; i < m; ++i)
        for (int p = 0; p < k; ++p) {
          double s = 0.0;
          const double* Gi = G + i * n;
          const double* Bp = B + p * n;
          for (int j = 0; j < n; ++j) s += Gi[j] * Bp[j];
          GA[i * k + p] += s;
        }
    }
    if (t->node(b.id).requires_grad) {
      double* GB = t->node(b.id).grad.data();
      const double* A = t->node(a.id).val.data();
      for (int i = 0; i < m; ++i)
        for (int p = 0; p < k; ++p) {
          double av = A[i * k + p];
          if (av == 0.0) continue;
          const double* Gi = G + i * n;
          double* GBp = GB + p * n;
          for (int j = 0; j < n; ++j) GBp[j] += av * Gi[j];
        }
    }
  };
  return {t, id};
}

// M{m,k} x v{k} -> {m}
inline Tensor matvec(Tensor m, Tensor v) {
  Tape* t = detail::tape_of(m, v);
  const Shape& sm = m.shape();
  const Shape& sv = v.shape();
  if (sm.size() != 2 || sv.size() != 1 || sm[1] != sv[0])
    throw std::invalid_argument("matvec: incompatible shapes");
  int rows = sm[0], cols = sm[1];
  int id = t->make({rows}, t->node(m.id).requires_grad || t->node(v.id).requires_grad);
  auto& out = t->node(id);
  const double* M = m.val().data();
  const double* V = v.val().data();
  for (int i = 0; i < rows; ++i) {
    double s = 0.0;
    const double* Mi = M + i * cols;
    for (int j = 0; j < cols; ++j) s += Mi[j] * V[j];
    out.val[static_cast<size_t>(i)] = s;
  }
  out.back = [t, id, m, v, rows, cols]() {
    const auto& g = t->node(id).grad;
    if (t->node(m.id).requires_grad) {
      auto& gm = t->node(m.id).grad;
      const auto& vv = t->node(v.id).val;
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) gm[static_cast<size_t>(i * cols + j)] += g[static_cast<size_t>(i)] * vv[static_cast<size_t>(j)];
    }
    if (t->node(v.id).requires_grad) {
      auto& gv = t->node(v.id).grad;
      const auto& mv = t->node(m.id).val;
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) gv[static_cast<size_t>(j)] += g[static_cast<size_t>(i)] * mv[static_cast<size_t>(i * cols + j)];
    }
  };
  return {t, id};
}

inline Tensor transpose(Tensor x) {
  Tape* t = x.tape;
  const Shape& s = x.shape();
  if (s.size() != 2) throw std::invalid_argument("transpose: rank-2 only");
  int r = s[0], c = s[1];
  int id = t->make({c, r}, t->node(x.id).requires_grad);
  auto& out = t->node(id);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out.val[static_cast<size_t>(j * r + i)] = x.val()[static_cast<size_t>(i * c + j)];
  out.back = [t, id, x, r, c]() {
    if (!t->node(x.id).requires_grad) return;
    const auto& g = t->node(id).grad;
    auto& gx = t->node(x.id).grad;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) gx[static_cast<size_t>(i * c + j)] += g[static_cast<size_t>(j * r + i)];
  };
  return {t, id};
}

inline Tensor reshape(Tensor x, Shape shape) {
  Tape* t = x.tape;
  if (numel(shape) != x.size()) throw std::invalid_argument("reshape: element count mismatch");
  int id = t->make(std::move(shape), t->node(x.id).requires_grad);
  auto& out = t->node(id);
  out.val = x.val();
  out.back = [t, id, x]() {
    if (!t->node(x.id).requires_grad) return;
    const auto& g = t->node(id).grad;
    auto& gx = t->node(x.id).grad;
    for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  };
  return {t, id};
}

// ---- reductions ----

inline Tensor sum(Tensor x) {
  Tape* t = x.tape;
  int id = t->make({1}, t->node(x.id).requires_grad);
  double s = 0.0;
  for (double v : x.val()) s += v;
  t->node(id).val[0] = s;
  t->node(id).back = [t, id, x]() {
    if (!t->node(x.id).requires_grad) return;
    double g = t->node(id).grad[0];
    auto& gx = t->node(x.id).grad;
    for (size_t i = 0; i < gx.size(); ++i) gx[i] += g;
  };
  return {t, id};
}

inline Tensor mean(Tensor x) {
  Tape* t = x.tape;
  int id = t->make({1}, t->node(x.id).requires_grad);
  double s = 0.0;
  for (double v : x.val()) s += v;
  double inv = 1.0 / static_cast<double>(x.size());
  t->node(id).val[0] = s * inv;
  t->node(id).back = [t, id, x, inv]() {
    if (!t->node(x.id).requires_grad) return;
    double g = t->node(id).grad[0] * inv;
    auto& gx = t->node(x.id).grad;
    for (size_t i = 0; i < gx.size(); ++i) gx[i] += g;
  };
  return {t, id};
}

// Max over all elements -> scalar; gradient goes to the first argmax.
inline Tensor vmax(Tensor x) {
  Tape* t = x.tape;
  int id = t->make({1}, t->node(x.id).requires_grad);
  const auto& xv = x.val();
  size_t arg = 0;
  for (size_t i = 1; i < xv.size(); ++i)
    if (xv[i] > xv[arg]) arg = i;
  t->node(id).val[0] = xv[arg];
  t->node(id).back = [t, id, x, arg]() {
    if (!t->node(x.id).requires_grad) return;
    t->node(x.id).grad[arg] += t->node(id).grad[0];
  };
  return {t, id};
}

inline Tensor dot(Tensor a, Tensor b) {
  Tape* t = detail::tape_of(a, b);
  detail::check_same_shape(a, b, "dot");
  int id = t->make({1}, t->node(a.id).requires_grad || t->node(b.id).requires_grad);
  double s = 0.0;
  for (size_t i = 0; i < a.val().size(); ++i) s += a.val()[i] * b.val()[i];
  t->node(id).val[0] = s;
  t->node(id).back = [t, id, a, b]() {
    double g = t->node(id).grad[0];
    if (t->node(a.id).requires_grad) {
      auto& ga = t->node(a.id).grad;
      const auto& bv = t->node(b.id).val;
      for (size_t i = 0; i < ga.size(); ++i) ga[i] += g * bv[i];
    }
    if (t->node(b.id).requires_grad) {
      auto& gb = t->node(b.id).grad;
      const auto& av = t->node(a.id).val;
      for (size_t i = 0; i < gb.size(); ++i) gb[i] += g * av[i];
    }
  };
  return {t, id};
}

// ---- softmax / losses ----

// Softmax over the last axis: vectors as a whole, matrices row-wise.
inline Tensor softmax(Tensor x) {
  Tape* t = x.tape;
  const Shape& s = x.shape();
  int rows = s.size() == 2 ? s[0] : 1;
  int cols = s.size() == 2 ? s[1] : s[0];
  int id = t->make(s, t->node(x.id).requires_grad);
  auto& out = t->node(id);
  for (int r = 0; r < rows; ++r) {
    const double* xr = x.val().data() + r * cols;
    double* yr = out.val.data() + r * cols;
    double mx = xr[0];
    for (int j = 1; j < cols; ++j) mx = std::max(mx, xr[j]);
    double z = 0.0;
    for (int j = 0; j < cols; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      z += yr[j];
    }
    for (int j = 0; j < cols; ++j) yr[j] /= z;
  }
  out.back = [t, id, x, rows, cols]() {
    if (!t->node(x.id).requires_grad) return;
    const auto& y = t->node(id).val;
    const auto& g = t->node(id).grad;
    auto& gx = t->node(x.id).grad;
    for (int r = 0; r < rows; ++r) {
      double dotgy = 0.0;
      for (int j = 0; j < cols; ++j) dotgy += g[static_cast<size_t>(r * cols + j)] * y[static_cast<size_t>(r * cols + j)];
      for (int j = 0; j < cols; ++j) {
        size_t i = static_cast<size_t>(r * cols + j);
        gx[i] += y[i] * (g[i] - dotgy);
      }
    }
  };
  return {t, id};
}

// Mean cross-entropy of logits {n,C} against integer labels; the standard
// stable logsumexp form.
inline Tensor cross_entropy(Tensor logits, const std::vector<int>& labels) {
  Tape* t = logits.tape;
  const Shape& s = logits.shape();
  if (s.size() != 2) throw std::invalid_argument("cross_entropy: logits must be rank-2");
  int n = s[0], c = s[1];
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("cross_entropy: label count mismatch");
  for (int lab : labels)
    if (lab < 0 || lab >= c) throw std::invalid_argument("cross_entropy: label out of range");
  int id = t->make({1}, t->node(logits.id).requires_grad);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* z = logits.val().data() + i * c;
    double mx = z[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, z[j]);
    double lse = 0.0;
    for (int j = 0; j < c; ++j) lse += std::exp(z[j] - mx);
    lse = mx + std::log(lse);
    total += lse - z[labels[static_cast<size_t>(i)]];
  }
  t->node(id).val[0] = total / n;
  t->node(id).back = [t, id, logits, labels, n, c]() {
    if (!t->node(logits.id).requires_grad) return;
    double g = t->node(id).grad[0] / n;
    const auto& zv = t->node(logits.id).val;
    auto& gz = t->node(logits.id).grad;
    for (int i = 0; i < n; ++i) {
      const double* z = zv.data() + i * c;
      double mx = z[0];
      for (int j = 1; j < c; ++j) mx = std::max(mx, z[j]);
      double sumexp = 0.0;
      for (int j = 0; j < c; ++j) sumexp += std::exp(z[j] - mx);
      for (int j = 0; j < c; ++j) {
        double p = std::exp(z[j] - mx) / sumexp;
        gz[static_cast<size_t>(i * c + j)] += g * (p - (labels[static_cast<size_t>(i)] == j ? 1.0 : 0.0));
      }
    }
  };
  return {t, id};
}

// ---- structure ops ----

inline Tensor concat(Tensor a, Tensor b) {
  Tape* t = detail::tape_of(a, b);
  if (a.shape().size() != 1 || b.shape().size() != 1)
    throw std::invalid_argument("concat: rank-1 only");
  int na = a.size(), nb = b.size();
  int id = t->make({na + nb}, t->node(a.id).requires_grad || t->node(b.id).requires_grad);
  auto& out = t->node(id);
  std::copy(a.val().begin(), a.val().end(), out.val.begin());
  std::copy(b.val().begin(), b.val().end(), out.val.begin() + na);
  out.back = [t, id, a, b, na, nb]() {
    const auto& g = t->node(id).grad;
    if (t->node(a.id).requires_grad) {
      auto& ga = t->node(a.id).grad;
      for (int i = 0; i < na; ++i) ga[static_cast<size_t>(i)] += g[static_cast<size_t>(i)];
    }
    if (t->node(b.id).requires_grad) {
      auto& gb = t->node(b.id).grad;
      for (int i = 0; i < nb; ++i) gb[static_cast<size_t>(i)] += g[static_cast<size_t>(na + i)];
    }
  };
  return {t, id};
}

// Column-wise concat of two matrices with equal row counts.
inline Tensor hconcat(Tensor a, Tensor b) {
  Tape* t = detail::tape_of(a, b);
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() != 2 || sb.size() != 2 || sa[0] != sb[0])
    throw std::invalid_argument("hconcat: row count mismatch");
  int r = sa[0], ca = sa[1], cb = sb[1];
  int id = t->make({r, ca + cb}, t->node(a.id).requires_grad || t->node(b.id).requires_grad);
  auto& out = t->node(id);
  for (int i = 0; i < r; ++i) {
    std::copy(a.val().begin() + i * ca, a.val().begin() + (i + 1) * ca, out.val.begin() + i * (ca + cb));
    std::copy(b.val().begin() + i * cb, b.val().begin() + (i + 1) * cb, out.val.begin() + i * (ca + cb) + ca);
  }
  out.back = [t, id, a, b, r, ca, cb]() {
    const auto& g = t->node(id).grad;
    for (int i = 0; i < r; ++i) {
      if (t->node(a.id).requires_grad) {
        auto& ga = t->node(a.id).grad;
        for (int j = 0; j < ca; ++j) ga[static_cast<size_t>(i * ca + j)] += g[static_cast<size_t>(i * (ca + cb) + j)];
      }
      if (t->node(b.id).requires_grad) {
        auto& gb = t->node(b.id).grad;
        for (int j = 0; j < cb; ++j) gb[static_cast<size_t>(i * cb + j)] += g[static_cast<size_t>(i * (ca + cb) + ca + j)];
      }
    }
  };
  return {t, id};
}

// Row gather from an embedding-style matrix; backward scatter-adds.
inline Tensor gather_rows(Tensor m, const std::vector<int>& idx) {
  Tape* t = m.tape;
  const Shape& s = m.shape();
  if (s.size() != 2) throw std::invalid_argument("gather_rows: rank-2 only");
  int cols = s[1];
  for (int i : idx)
    if (i < 0 || i >= s[0]) throw std::out_of_range("gather_rows: index out of range");
  int n = static_cast<int>(idx.size());
  int id = t->make({n, cols}, t->node(m.id).requires_grad);
  auto& out = t->node(id);
  for (int i = 0; i < n; ++i)
    std::copy(m.val().begin() + idx[static_cast<size_t>(i)] * cols, m.val().begin() + (idx[static_cast<size_t>(i)] + 1) * cols,
              out.val.begin() + i * cols);
  out.back = [t, id, m, idx, n, cols]() {
    if (!t->node(m.id).requires_grad) return;
    const auto& g = t->node(id).grad;
    auto& gm = t->node(m.id).grad;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < cols; ++j) gm[static_cast<size_t>(idx[static_cast<size_t>(i)] * cols + j)] += g[static_cast<size_t>(i * cols + j)];
  };
  return {t, id};
}

// Element gather from a vector.
inline Tensor gather(Tensor v, const std::vector<int>& idx) {
  Tape* t = v.tape;
  if (v.shape().size() != 1) throw std::invalid_argument("gather: rank-1 only");
  for (int i : idx)
    if (i < 0 || i >= v.size()) throw std::out_of_range("gather: index out of range");
  int n = static_cast<int>(idx.size());
  int id = t->make({n}, t->node(v.id).requires_grad);
  auto& out = t->node(id);
  for (int i = 0; i < n; ++i) out.val[static_cast<size_t>(i)] = v.val()[static_cast<size_t>(idx[static_cast<size_t>(i)])];
  out.back = [t, id, v, idx, n]() {
    if (!t->node(v.id).requires_grad) return;
    const auto& g = t->node(id).grad;
    auto& gv = t->node(v.id).grad;
    for (int i = 0; i < n; ++i) gv[static_cast<size_t>(idx[static_cast<size_t>(i)])] += g[static_cast<size_t>(i)];
  };
  return {t, id};
}

// Scale row i of a matrix by s[i].
inline Tensor row_scale(Tensor m, Tensor s) {
  Tape* t = detail::tape_of(m, s);
  const Shape& sm = m.shape();
  if (sm.size() != 2 || s.shape().size() != 1 || s.size() != sm[0])
    throw std::invalid_argument("row_scale: need {r,c} and {r}");
  int r = sm[0], c = sm[1];
  int id = t->make(sm, t->node(m.id).requires_grad || t->node(s.id).requires_grad);
  auto& out = t->node(id);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out.val[static_cast<size_t>(i * c + j)] = m.val()[static_cast<size_t>(i * c + j)] * s.val()[static_cast<size_t>(i)];
  out.back = [t, id, m, s, r, c]() {
    const auto& g = t->node(id).grad;
    if (t->node(m.id).requires_grad) {
      auto& gm = t->node(m.id).grad;
      const auto& sv = t->node(s.id).val;
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) gm[static_cast<size_t>(i * c + j)] += g[static_cast<size_t>(i * c + j)] * sv[static_cast<size_t>(i)];
    }
    if (t->node(s.id).requires_grad) {
      auto& gs = t->node(s.id).grad;
      const auto& mv = t->node(m.id).val;
      for (int i = 0; i < r; ++i) {
        double acc = 0.0;
        for (int j = 0; j < c; ++j) acc += g[static_cast<size_t>(i * c + j)] * mv[static_cast<size_t>(i * c + j)];
        gs[static_cast<size_t>(i)] += acc;
      }
    }
  };
  return {t, id};
}

// Add a row vector to every row of a matrix.
inline Tensor add_rowvec(Tensor m, Tensor v) {
  Tape* t = detail::tape_of(m, v);
  const Shape& sm = m.shape();
  if (sm.size() != 2 || v.shape().size() != 1 || v.size() != sm[1])
    throw std::invalid_argument("add_rowvec: need {r,c} and {c}");
  int r = sm[0], c = sm[1];
  int id = t->make(sm, t->node(m.id).requires_grad || t->node(v.id).requires_grad);
  auto& out = t->node(id);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out.val[static_cast<size_t>(i * c + j)] = m.val()[static_cast<size_t>(i * c + j)] + v.val()[static_cast<size_t>(j)];
  out.back = [t, id, m, v, r, c]() {
    const auto& g = t->node(id).grad;
    if (t->node(m.id).requires_grad) {
      auto& gm = t->node(m.id).grad;
      for (size_t i = 0; i < g.size(); ++i) gm[i] += g[i];
    }
    if (t->node(v.id).requires_grad) {
      auto& gv = t->node(v.id).grad;
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) gv[static_cast<size_t>(j)] += g[static_cast<size_t>(i * c + j)];
    }
  };
  return {t, id};
}

// y = s * x for scalar tensor s.
inline Tensor scale_by(Tensor x, Tensor s) {
  Tape* t = detail::tape_of(x, s);
  if (s.size() != 1) throw std::invalid_argument("scale_by: scalar required");
  int id = t->make(x.shape(), t->node(x.id).requires_grad || t->node(s.id).requires_grad);
  auto& out = t->node(id);
  double sv = s.val()[0];
  for (size_t i = 0; i < out.val.size(); ++i) out.val[i] = x.val()[i] * sv;
  out.back = [t, id, x, s]() {
    const auto& g = t->node(id).grad;
    double sv = t->node(s.id).val[0];
    if (t->node(x.id).requires_grad) {
      auto& gx = t->node(x.id).grad;
      for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * sv;
    }
    if (t->node(s.id).requires_grad) {
      const auto& xv = t->node(x.id).val;
      double acc = 0.0;
      for (size_t i = 0; i < g.size(); ++i) acc += g[i] * xv[i];
      t->node(s.id).grad[0] += acc;
    }
  };
  return {t, id};
}

// y = x / s for scalar tensor s.
inline Tensor div_by(Tensor x, Tensor s) {
  Tape* t = detail::tape_of(x, s);
  if (s.size() != 1) throw std::invalid_argument("div_by: scalar required");
  int id = t->make(x.shape(), t->node(x.id).requires_grad || t->node(s.id).requires_grad);
  auto& out = t->node(id);
  double sv = s.val()[0];
  for (size_t i = 0; i < out.val.size(); ++i) out.val[i] = x.val()[i] / sv;
  out.back = [t, id, x, s]() {
    const auto& g = t->node(id).grad;
    double sv = t->node(s.id).val[0];
    if (t->node(x.id).requires_grad) {
      auto& gx = t->node(x.id).grad;
      for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] / sv;
    }
    if (t->node(s.id).requires_grad) {
      const auto& xv = t->node(x.id).val;
      double acc = 0.0;
      for (size_t i = 0; i < g.size(); ++i) acc += g[i] * xv[i];
      t->node(s.id).grad[0] -= acc / (sv * sv);
    }
  };
  return {t, id};
}

// Group-mean pooling: out[r,:] = mean of rows listed in groups[r]. Empty
// groups produce zero rows.
inline Tensor pool_rows(Tensor m, const std::vector<std::vector<int>>& groups) {
  Tape* t = m.tape;
  const Shape& s = m.shape();
  if (s.size() != 2) throw std::invalid_argument("pool_rows: rank-2 only");
  int cols = s[1];
  int ng = static_cast<int>(groups.size());
  for (const auto& g : groups)
    for (int i : g)
      if (i < 0 || i >= s[0]) throw std::out_of_range("pool_rows: row index out of range");
  int id = t->make({ng, cols}, t->node(m.id).requires_grad);
  auto& out = t->node(id);
  for (int r = 0; r < ng; ++r) {
    if (groups[static_cast<size_t>(r)].empty()) continue;
    double inv = 1.0 / static_cast<double>(groups[static_cast<size_t>(r)].size());
    for (int row : groups[static_cast<size_t>(r)])
      for (int j = 0; j < cols; ++j) out.val[static_cast<size_t>(r * cols + j)] += m.val()[static_cast<size_t>(row * cols + j)] * inv;
  }
  out.back = [t, id, m, groups, ng, cols]() {
    if (!t->node(m.id).requires_grad) return;
    const auto& g = t->node(id).grad;
    auto& gm = t->node(m.id).grad;
    for (int r = 0; r < ng; ++r) {
      if (groups[static_cast<size_t>(r)].empty()) continue;
      double inv = 1.0 / static_cast<double>(groups[static_cast<size_t>(r)].size());
      for (int row : groups[static_cast<size_t>(r)])
        for (int j = 0; j < cols; ++j) gm[static_cast<size_t>(row * cols + j)] += g[static_cast<size_t>(r * cols + j)] * inv;
    }
  };
  return {t, id};
}

// Append a constant 1 to a vector (bias augmentation).
inline Tensor append_one(Tensor v) {
  Tape* t = v.tape;
  return concat(v, t->leaf({1}, {1.0}));
}

// x / sum(x); callers must ensure sum(x) != 0.
inline Tensor normalize_sum(Tensor x) { return div_by(x, sum(x)); }

}  // namespace gvqa::nn
