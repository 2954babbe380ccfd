#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "gvqa/nn/adam.hpp"
#include "gvqa/nn/grad_check.hpp"
#include "gvqa/nn/rng.hpp"
#include "gvqa/nn/tensor.hpp"

using namespace gvqa::nn;

TEST_CASE("softmax of a constant row is uniform") {
  Tape t;
  Tensor x = t.leaf({3}, {0.0, 0.0, 0.0});
  Tensor y = softmax(x);
  for (double v : y.val()) CHECK(v == Catch::Approx(1.0 / 3.0).margin(1e-12));
}

TEST_CASE("matmul against identity is a no-op") {
  Tape t;
  Tensor I = t.leaf({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor A = t.leaf({3, 2}, {1, 2, 3, 4, 5, 6});
  Tensor y = matmul(I, A);
  for (size_t i = 0; i < y.val().size(); ++i) CHECK(y.val()[i] == A.val()[i]);
}

TEST_CASE("cross entropy of a confident correct prediction is ~0") {
  Tape t;
  Tensor z = t.leaf({1, 3}, {100.0, 0.0, 0.0});
  Tensor loss = cross_entropy(z, {0});
  CHECK(loss.val()[0] < 1e-9);
}

TEST_CASE("cross entropy of a uniform prediction is ln C") {
  Tape t;
  Tensor z = t.leaf({2, 3}, {0, 0, 0, 0, 0, 0});
  Tensor loss = cross_entropy(z, {1, 2});
  CHECK(loss.val()[0] == Catch::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("backward: x^2 at x=3 gives grad 6") {
  Tape t;
  Tensor x = t.leaf({1}, {3.0}, true);
  Tensor y = mul(x, x);
  t.backward(y);
  CHECK(x.grad()[0] == Catch::Approx(6.0));
}

TEST_CASE("backward: constant function gives zero grad") {
  Tape t;
  Tensor x = t.leaf({4}, {1, 2, 3, 4}, true);
  Tensor c = t.leaf({1}, {7.0});
  Tensor loss = mul(c, c);
  t.backward(loss);
  for (double g : x.grad()) CHECK(g == 0.0);
}

TEST_CASE("backward: relu chain with all-negative input gives zero grads") {
  Tape t;
  Tensor x = t.leaf({3}, {-1.0, -2.0, -0.5}, true);
  Tensor loss = sum(relu(x));
  t.backward(loss);
  for (double g : x.grad()) CHECK(g == 0.0);
}

TEST_CASE("backward refuses non-scalar loss and double consumption") {
  Tape t;
  Tensor x = t.leaf({2}, {1.0, 2.0}, true);
  Tensor y = mul(x, x);
  CHECK_THROWS_AS(t.backward(y), std::invalid_argument);
  Tensor s = sum(y);
  t.backward(s);
  CHECK_THROWS_AS(t.backward(s), std::logic_error);
}

TEST_CASE("shape mismatches are rejected") {
  Tape t;
  Tensor a = t.leaf({2}, {1, 2});
  Tensor b = t.leaf({3}, {1, 2, 3});
  CHECK_THROWS_AS(add(a, b), std::invalid_argument);
  Tensor m = t.leaf({2, 2}, {1, 2, 3, 4});
  Tensor n = t.leaf({3, 2}, {1, 2, 3, 4, 5, 6});
  CHECK_THROWS_AS(matmul(m, n), std::invalid_argument);
}

TEST_CASE("grad_check: quadratic form is exact to float noise") {
  auto fn = [](Tape& t, Tensor x) {
    Tensor q = t.leaf({3, 3}, {2, 1, 0, 1, 3, 1, 0, 1, 4});
    return dot(x, matvec(q, x));
  };
  double err = grad_check(fn, {3}, {0.3, -0.7, 1.1});
  CHECK(err < 1e-6);
}

TEST_CASE("grad_check: constant function reports zero error") {
  auto fn = [](Tape& t, Tensor) { return t.scalar(4.0); };
  CHECK(grad_check(fn, {2}, {1.0, 2.0}) == 0.0);
}

TEST_CASE("grad_check: random two-layer network under 1e-4") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    auto rng = make_rng(1000 + seed);
    auto w1 = uniform_vec(rng, 12, -1.0, 1.0);
    auto w2 = uniform_vec(rng, 4, -1.0, 1.0);
    auto point = uniform_vec(rng, 3, 0.2, 1.0);
    auto fn = [&](Tape& t, Tensor x) {
      Tensor W1 = t.leaf({4, 3}, w1);
      Tensor W2 = t.leaf({1, 4}, w2);
      Tensor h = sigmoid(matvec(W1, x));
      return sum(matvec(W2, h));
    };
    CHECK(grad_check(fn, {3}, point) < 1e-4);
  }
}

TEST_CASE("every differentiable op passes grad_check on 10 seeds") {
  struct Case {
    const char* name;
    Shape shape;
    ScalarFn fn;
    double lo = 0.1, hi = 1.0;  // defaults keep relu/min/max away from kinks
  };
  std::vector<Case> cases;
  cases.push_back({"add", {4}, [](Tape& t, Tensor x) {
                     Tensor b = t.leaf({4}, {0.3, 0.4, 0.5, 0.6}, true);
                     return sum(mul(add(x, b), add(x, b)));
                   }});
  cases.push_back({"sub_div", {4}, [](Tape& t, Tensor x) {
                     Tensor b = t.leaf({4}, {2.0, 3.0, 4.0, 5.0});
                     return sum(divt(sub(x, b), b));
                   }});
  cases.push_back({"affine_relu", {4}, [](Tape& t, Tensor x) {
                     return sum(relu(affine(x, 2.0, -0.9)));
                   }});
  cases.push_back({"sigmoid_mean", {5}, [](Tape& t, Tensor x) { return mean(sigmoid(x)); }});
  cases.push_back({"softmax_vec", {4}, [](Tape& t, Tensor x) {
                     Tensor w = t.leaf({4}, {0.1, 0.7, 0.2, 0.9});
                     return dot(softmax(x), w);
                   }});
  cases.push_back({"softmax_rows", {6}, [](Tape& t, Tensor x) {
                     Tensor m = reshape(x, {2, 3});
                     Tensor w = t.leaf({2, 3}, {0.1, 0.5, 0.2, 0.9, 0.3, 0.4});
                     return sum(mul(softmax(m), w));
                   }});
  cases.push_back({"matmul_both", {6}, [](Tape& t, Tensor x) {
                     Tensor a = reshape(x, {2, 3});
                     Tensor b = t.leaf({3, 2}, {0.4, 0.1, 0.2, 0.8, 0.5, 0.3}, true);
                     return sum(matmul(a, b));
                   }});
  cases.push_back({"matvec_transpose", {6}, [](Tape& t, Tensor x) {
                     Tensor m = transpose(reshape(x, {3, 2}));
                     Tensor v = t.leaf({3}, {0.2, 0.4, 0.6});
                     return sum(matvec(m, v));
                   }});
  cases.push_back({"vmax_divby", {4}, [](Tape& t, Tensor x) {
                     return sum(div_by(x, vmax(x)));
                   },
                   0.1, 1.0});
  cases.push_back({"emin_emax", {4}, [](Tape& t, Tensor x) {
                     Tensor b = t.leaf({4}, {0.35, 0.55, 0.75, 0.95});
                     return divt(sum(emin(x, b)), sum(emax(x, b)));
                   }});
  cases.push_back({"concat_gather", {4}, [](Tape& t, Tensor x) {
                     Tensor more = t.leaf({2}, {0.3, 0.8});
                     Tensor c = concat(x, more);
                     return sum(gather(c, {0, 2, 4, 5}));
                   }});
  cases.push_back({"hconcat", {4}, [](Tape& t, Tensor x) {
                     Tensor a = reshape(x, {2, 2});
                     Tensor b = t.leaf({2, 1}, {0.5, 0.7});
                     Tensor w = t.leaf({3}, {0.2, 0.3, 0.4});
                     return sum(matvec(hconcat(a, b), w));
                   }});
  cases.push_back({"gather_rows", {6}, [](Tape& t, Tensor x) {
                     Tensor m = reshape(x, {3, 2});
                     return sum(gather_rows(m, {2, 0, 2}));
                   }});
  cases.push_back({"row_scale", {6}, [](Tape& t, Tensor x) {
                     Tensor m = reshape(x, {2, 3});
                     Tensor s = t.leaf({2}, {0.4, 1.7}, true);
                     return sum(row_scale(m, s));
                   }});
  cases.push_back({"add_rowvec", {6}, [](Tape& t, Tensor x) {
                     Tensor m = t.leaf({2, 3}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
                     Tensor v = gather(x, {0, 1, 2});
                     Tensor m2 = reshape(gather(x, {3, 4, 5, 3, 4, 5}), {2, 3});
                     return sum(mul(add_rowvec(m2, v), m));
                   }});
  cases.push_back({"scale_div_scalar", {4}, [](Tape& t, Tensor x) {
                     Tensor s = sum(x);
                     return sum(scale_by(div_by(x, s), mean(x)));
                   }});
  cases.push_back({"cross_entropy", {6}, [](Tape& t, Tensor x) {
                     return cross_entropy(reshape(x, {2, 3}), {0, 2});
                   },
                   -1.0, 1.0});
  cases.push_back({"pool_rows", {8}, [](Tape& t, Tensor x) {
                     Tensor m = reshape(x, {4, 2});
                     std::vector<std::vector<int>> groups = {{0, 1, 2}, {3}, {}};
                     Tensor w = t.leaf({3, 2}, {0.3, 0.6, 0.9, 0.2, 0.5, 0.8});
                     return sum(mul(pool_rows(m, groups), w));
                   }});

  for (const auto& c : cases) {
    for (uint64_t seed = 0; seed < 10; ++seed) {
      auto rng = make_rng(mix_seed(77, seed));
      auto point = uniform_vec(rng, static_cast<size_t>(numel(c.shape)), c.lo, c.hi);
      INFO(c.name << " seed " << seed);
      CHECK(grad_check(c.fn, c.shape, point) < 1e-4);
    }
  }
}

TEST_CASE("fixed seed gives bit-identical forward and backward") {
  auto run = [](uint64_t seed) {
    auto rng = make_rng(seed);
    auto w = uniform_vec(rng, 9, -1.0, 1.0);
    auto xv = uniform_vec(rng, 3, -1.0, 1.0);
    Tape t;
    Tensor W = t.leaf({3, 3}, w, true);
    Tensor x = t.leaf({3}, xv);
    Tensor loss = sum(softmax(matvec(W, x)));
    t.backward(loss);
    return std::make_pair(loss.val()[0], W.grad());
  };
  auto [l1, g1] = run(42);
  auto [l2, g2] = run(42);
  CHECK(l1 == l2);
  CHECK(g1 == g2);
}

TEST_CASE("params accumulate gradients across tapes and Adam steps descend") {
  Param w("w", {2});
  w.value = {2.0, -3.0};
  Adam opt(0.1);
  std::vector<Param*> params = {&w};
  double first_loss = 0.0, last_loss = 0.0;
  for (int it = 0; it < 60; ++it) {
    w.zero_grad();
    Tape t;
    Tensor wt = t.param(w);
    Tensor loss = dot(wt, wt);
    t.backward(loss);
    if (it == 0) first_loss = loss.val()[0];
    last_loss = loss.val()[0];
    opt.step(params);
  }
  CHECK(last_loss < first_loss);
  CHECK(last_loss < 0.5);
}
