#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "stgat/gradcheck.hpp"
#include "stgat/ops.hpp"
#include "stgat/optimizer.hpp"
#include "stgat/regularizers.hpp"

using namespace stgat;
using namespace stgat::ad;

namespace {

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
  return m;
}

// Runs finite differences for a scalar loss built from parameters.
double check_op(const std::function<Var(Tape&, std::vector<Var>&)>& build,
                std::vector<Parameter*> params, double eps = 1e-6) {
  auto run = [&](bool with_grad) {
    Tape t;
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (Parameter* p : params) vars.push_back(t.param(*p));
    Var loss = build(t, vars);
    double v = loss.value()(0, 0);
    if (with_grad) t.backward(loss);
    return v;
  };
  for (Parameter* p : params) p->reset_grad();
  run(true);
  GradCheckOptions opts;
  opts.epsilon = eps;
  return finite_diff_check([&] { return run(false); }, params, opts);
}

// Scalar loss from a matrix output: sum(out .* weights) with fixed weights.
Var weighted_sum(Tape& t, Var out, const Matrix& weights) {
  return sum(cmul(out, t.leaf(weights)));
}

}  // namespace

TEST_CASE("matmul basic products") {
  Tape t;
  Matrix i2 = Matrix::Identity(2, 2);
  Matrix v(2, 1);
  v << 5, 7;
  Var r = matmul(t.leaf(i2), t.leaf(v));
  CHECK(r.value()(0, 0) == 5.0);
  CHECK(r.value()(1, 0) == 7.0);

  Matrix a(1, 2), b(2, 1);
  a << 1, 2;
  b << 3, 4;
  Var p = matmul(t.leaf(a), t.leaf(b));
  CHECK(p.value()(0, 0) == 11.0);
}

TEST_CASE("matmul shape mismatch names both shapes") {
  Tape t;
  Var a = t.leaf(Matrix::Zero(2, 3));
  Var b = t.leaf(Matrix::Zero(4, 5));
  CHECK_THROWS_WITH_AS(matmul(a, b),
                       "matmul: inner dimensions disagree: [2x3] vs [4x5]",
                       DimensionError);
}

TEST_CASE("matmul gradient matches finite differences") {
  Rng rng(11);
  Parameter a("a", random_matrix(rng, 3, 4));
  Parameter b("b", random_matrix(rng, 4, 2));
  double rel = check_op(
      [](Tape&, std::vector<Var>& v) { return sum(matmul(v[0], v[1])); },
      {&a, &b});
  CHECK(rel < 1e-6);
}

TEST_CASE("activation point values") {
  Tape t;
  Matrix x(1, 1);
  x << 3.0;
  CHECK(leaky_relu(t.leaf(x), 0.2).value()(0, 0) == 3.0);
  x << -1.0;
  CHECK(leaky_relu(t.leaf(x), 0.2).value()(0, 0) == doctest::Approx(-0.2));
  x << 0.0;
  CHECK(sigmoid(t.leaf(x)).value()(0, 0) == 0.5);
  CHECK(stgat::ad::tanh(t.leaf(x)).value()(0, 0) == 0.0);
  x << -2.0;
  CHECK(elu(t.leaf(x)).value()(0, 0) == doctest::Approx(std::expm1(-2.0)));
}

TEST_CASE("activation configuration errors") {
  CHECK_THROWS_AS(activation_from_string("swish"), ConfigError);
  Tape t;
  Var x = t.leaf(Matrix::Ones(1, 1));
  CHECK_THROWS_AS(leaky_relu(x, 1.5), ConfigError);
  CHECK_THROWS_AS(leaky_relu(x, 0.0), ConfigError);
}

TEST_CASE("all activations pass finite differences on random inputs") {
  for (auto kind : {Activation::LeakyRelu, Activation::Sigmoid,
                    Activation::Tanh, Activation::Elu, Activation::Relu}) {
    for (uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(seed + 100);
      Parameter x("x", random_matrix(rng, 3, 3));
      Matrix w = random_matrix(rng, 3, 3);
      double rel = check_op(
          [&](Tape& t, std::vector<Var>& v) {
            return weighted_sum(t, activation(v[0], kind, 0.2), w);
          },
          {&x});
      CHECK_MESSAGE(rel < 1e-4, "kind=", to_string(kind), " seed=", seed);
    }
  }
}

TEST_CASE("masked softmax examples") {
  Tape t;
  Matrix s(2, 1);
  s << 0, 0;
  Var y = masked_softmax(t.leaf(s), {0, 1});
  CHECK(y.value()(0, 0) == doctest::Approx(0.5));
  CHECK(y.value()(1, 0) == doctest::Approx(0.5));

  s << std::log(2.0), 0;
  Var y2 = masked_softmax(t.leaf(s), {0, 1});
  CHECK(y2.value()(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(y2.value()(1, 0) == doctest::Approx(1.0 / 3.0));

  Var y3 = masked_softmax(t.leaf(s), {1});
  CHECK(y3.value()(1, 0) == 1.0);
  CHECK(y3.value()(0, 0) == 0.0);
}

TEST_CASE("masked softmax rejects empty masks") {
  Tape t;
  Var s = t.leaf(Matrix::Zero(3, 1));
  CHECK_THROWS_AS(masked_softmax(s, {}), EmptyNeighborhoodError);
}

TEST_CASE("masked softmax normalization property") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    int n = 2 + rng.uniform_int(8);
    Matrix s = random_matrix(rng, n, 1, 3.0);
    std::vector<int> mask;
    for (int i = 0; i < n; ++i)
      if (rng.bernoulli(0.6)) mask.push_back(i);
    if (mask.empty()) mask.push_back(rng.uniform_int(n));
    Tape t;
    Var y = masked_softmax(t.leaf(s), mask);
    double total = 0.0;
    std::vector<bool> in(n, false);
    for (int i : mask) in[static_cast<size_t>(i)] = true;
    for (int i = 0; i < n; ++i) {
      if (in[static_cast<size_t>(i)]) {
        total += y.value()(i, 0);
        CHECK(y.value()(i, 0) >= 0.0);
      } else {
        CHECK(y.value()(i, 0) == 0.0);
      }
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("masked and rowwise softmax gradients") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 7);
    Parameter s("s", random_matrix(rng, 5, 1));
    Matrix w = random_matrix(rng, 5, 1);
    double rel = check_op(
        [&](Tape& t, std::vector<Var>& v) {
          return weighted_sum(t, masked_softmax(v[0], {0, 2, 4}), w);
        },
        {&s});
    CHECK(rel < 1e-4);

    Parameter m("m", random_matrix(rng, 4, 3));
    Matrix w2 = random_matrix(rng, 4, 3);
    double rel2 = check_op(
        [&](Tape& t, std::vector<Var>& v) {
          return weighted_sum(t, rowwise_softmax(v[0]), w2);
        },
        {&m});
    CHECK(rel2 < 1e-4);
  }
}

TEST_CASE("mse examples") {
  Tape t;
  Matrix p(2, 2), y(2, 2);
  p.setConstant(1.5);
  y.setConstant(1.5);
  CHECK(mse_loss(t.leaf(p), t.leaf(y)).value()(0, 0) == 0.0);

  Matrix p1(1, 1), y1(1, 1);
  p1 << 2;
  y1 << 0;
  CHECK(mse_loss(t.leaf(p1), t.leaf(y1)).value()(0, 0) == 4.0);

  p.setConstant(2.0);
  y.setConstant(1.0);
  CHECK(mse_loss(t.leaf(p), t.leaf(y)).value()(0, 0) == 1.0);

  CHECK_THROWS_AS(mse_loss(t.leaf(p), t.leaf(p1)), DimensionError);
}

TEST_CASE("mse gradient is 2(a-b)/(mn)") {
  Rng rng(3);
  Parameter p("p", random_matrix(rng, 3, 2));
  Matrix truth = random_matrix(rng, 3, 2);
  p.reset_grad();
  Tape t;
  Var v = t.param(p);
  Var loss = mse_loss(v, t.leaf(truth));
  t.backward(loss);
  Matrix expect = 2.0 / 6.0 * (p.value - truth);
  CHECK((p.grad - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("structural op gradients") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 31);
    Parameter a("a", random_matrix(rng, 4, 3));
    Parameter b("b", random_matrix(rng, 4, 3));
    Parameter r("r", random_matrix(rng, 1, 3));
    Parameter s("s", random_matrix(rng, 4, 1));
    Matrix w43 = random_matrix(rng, 4, 3);
    Matrix w46 = random_matrix(rng, 4, 6);
    Matrix w83 = random_matrix(rng, 8, 3);
    Matrix w33 = random_matrix(rng, 3, 3);
    Matrix w41 = random_matrix(rng, 4, 1);

    CHECK(check_op(
              [&](Tape& t, std::vector<Var>& v) {
                return weighted_sum(t, add_row_broadcast(v[0], v[2]), w43);
              },
              {&a, &b, &r}) < 1e-4);
    CHECK(check_op(
              [&](Tape& t, std::vector<Var>& v) {
                std::vector<Var> parts{v[0], v[1]};
                return weighted_sum(t, concat_cols(parts), w46);
              },
              {&a, &b}) < 1e-4);
    CHECK(check_op(
              [&](Tape& t, std::vector<Var>& v) {
                std::vector<Var> parts{v[0], v[1]};
                return weighted_sum(t, concat_rows(parts), w83);
              },
              {&a, &b}) < 1e-4);
    CHECK(check_op(
              [&](Tape& t, std::vector<Var>& v) {
                return weighted_sum(t, gather_rows(v[0], {2, 0, 2}), w33);
              },
              {&a}) < 1e-4);
    CHECK(check_op(
              [&](Tape& t, std::vector<Var>& v) {
                return weighted_sum(t, col(v[0], 1), w41);
              },
              {&a}) < 1e-4);
    CHECK(check_op(
              [&](Tape& t, std::vector<Var>& v) {
                return weighted_sum(t, scale_rows(v[0], v[1]), w43);
              },
              {&a, &s}) < 1e-4);
    CHECK(check_op(
              [&](Tape& t, std::vector<Var>& v) {
                return weighted_sum(t, cmul(sub(v[0], v[1]), v[1]), w43);
              },
              {&a, &b}) < 1e-4);
    Matrix base = random_matrix(rng, 6, 5);
    Matrix w65 = random_matrix(rng, 6, 5);
    CHECK(check_op(
              [&](Tape& t, std::vector<Var>& v) {
                return weighted_sum(
                    t, scatter_rows_into(t, base, v[0], {5, 1, 3, 0}, 2), w65);
              },
              {&a}) < 1e-4);
  }
}

TEST_CASE("batchnorm train gradient matches finite differences") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 77);
    Parameter x("x", random_matrix(rng, 6, 4));
    Parameter g("g", random_matrix(rng, 1, 4).array().abs().matrix() +
                         Matrix::Constant(1, 4, 0.5));
    Parameter b("b", random_matrix(rng, 1, 4));
    Matrix w = random_matrix(rng, 6, 4);
    double rel = check_op(
        [&](Tape& t, std::vector<Var>& v) {
          return weighted_sum(t, batchnorm_train(v[0], v[1], v[2], 1e-5), w);
        },
        {&x, &g, &b});
    CHECK(rel < 1e-4);
  }
}

TEST_CASE("adam zero gradient is a fixed point") {
  Parameter p("p", Matrix::Constant(2, 2, 1.25));
  Matrix before = p.value;
  AdamOptimizer opt({&p}, {});
  for (int i = 0; i < 10; ++i) {
    p.reset_grad();
    opt.step();
  }
  CHECK((p.value - before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam first step moves each coordinate by about the learning rate") {
  Parameter p("p", Matrix::Zero(2, 2));
  Matrix g(2, 2);
  g << 4.0, -0.3, 11.0, 0.02;
  p.grad = g;
  AdamConfig cfg;
  cfg.learning_rate = 0.05;
  AdamOptimizer opt({&p}, cfg);
  opt.step();
  for (Eigen::Index i = 0; i < 4; ++i) {
    double delta = std::abs(*(p.value.data() + i));
    CHECK(delta == doctest::Approx(cfg.learning_rate).epsilon(1e-4));
    // Moves against the gradient sign.
    CHECK(*(p.value.data() + i) * *(g.data() + i) < 0.0);
  }
}

TEST_CASE("adam minimizes a quadratic") {
  Parameter w("w", Matrix::Zero(1, 1));
  AdamConfig cfg;
  cfg.learning_rate = 0.01;
  AdamOptimizer opt({&w}, cfg);
  for (int i = 0; i < 2000; ++i) {
    w.reset_grad();
    Tape t;
    Var v = t.param(w);
    Var target = t.leaf(Matrix::Constant(1, 1, 3.0));
    Var diff = sub(v, target);
    Var loss = sum(cmul(diff, diff));
    t.backward(loss);
    opt.step();
  }
  CHECK(std::abs(w.value(0, 0) - 3.0) < 1e-2);
}

TEST_CASE("dropout identity cases") {
  Rng rng(5);
  Matrix x = random_matrix(rng, 4, 4);
  Tape t;
  Var v = t.leaf(x);
  Var e0 = dropout(v, 0.0, Mode::Train, &rng);
  CHECK(e0.id() == v.id());
  Var e1 = dropout(v, 0.7, Mode::Eval, nullptr);
  CHECK(e1.id() == v.id());
  CHECK_THROWS_AS(dropout(v, 1.0, Mode::Train, &rng), ConfigError);
}

TEST_CASE("dropout preserves the mean over many samples") {
  Rng rng(42);
  const int n = 100000;
  Matrix x = Matrix::Constant(1, n, 2.0);
  Tape t;
  Var v = dropout(t.leaf(x), 0.5, Mode::Train, &rng);
  double got = v.value().mean();
  CHECK(std::abs(got - 2.0) / 2.0 < 0.02);
}

TEST_CASE("batchnorm wrapper modes") {
  Rng rng(9);
  BatchNorm bn("bn", 3);
  Matrix x = random_matrix(rng, 8, 3);

  Tape t;
  Var y = batchnorm(t, t.leaf(x), bn, Mode::Train);
  // Train mode normalizes with batch statistics: columns ~ zero mean, unit var.
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(y.value().col(j).mean()) < 1e-9);
  }
  CHECK(bn.batches_seen == 1);
  Matrix rm1 = bn.running_mean;

  // Second train batch updates running stats with momentum 0.9.
  Matrix x2 = random_matrix(rng, 8, 3);
  Tape t2;
  batchnorm(t2, t2.leaf(x2), bn, Mode::Train);
  Matrix expect = 0.9 * rm1 + 0.1 * x2.colwise().mean().matrix();
  CHECK((bn.running_mean - expect).cwiseAbs().maxCoeff() < 1e-12);

  // Eval is a deterministic affine on running stats.
  Tape t3;
  Var ye1 = batchnorm(t3, t3.leaf(x), bn, Mode::Eval);
  Tape t4;
  Var ye2 = batchnorm(t4, t4.leaf(x), bn, Mode::Eval);
  CHECK((ye1.value() - ye2.value()).cwiseAbs().maxCoeff() == 0.0);

  // A train batch of one row degrades to the running-statistics form.
  Matrix one = random_matrix(rng, 1, 3);
  Tape t5;
  Var y1 = batchnorm(t5, t5.leaf(one), bn, Mode::Train);
  Tape t6;
  Var y2 = batchnorm(t6, t6.leaf(one), bn, Mode::Eval);
  CHECK((y1.value() - y2.value()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("finite_diff_check on a scalar square") {
  Parameter w("w", Matrix::Constant(1, 1, 2.0));
  auto forward = [&] { return w.value(0, 0) * w.value(0, 0); };
  w.reset_grad();
  w.grad(0, 0) = 2.0 * w.value(0, 0);
  GradCheckOptions opts;
  opts.epsilon = 1e-5;
  double rel = finite_diff_check(forward, {&w}, opts);
  CHECK(rel < 1e-8);
}

TEST_CASE("graph attention matches finite differences") {
  std::vector<std::vector<int>> nbrs{{0, 1, 2}, {1, 0}, {2, 1, 0}, {3, 2}};
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 55);
    Parameter z("z", random_matrix(rng, 4, 3));
    Parameter w("w", random_matrix(rng, 6, 1));
    Matrix c = random_matrix(rng, 4, 3);
    double rel = check_op(
        [&](Tape& t, std::vector<Var>& v) {
          return weighted_sum(t, graph_attention(v[0], v[1], &nbrs, 0.2), c);
        },
        {&z, &w});
    CHECK(rel < 1e-4);
  }
}

TEST_CASE("graph attention weights normalize and fill the sink") {
  Rng rng(2);
  std::vector<std::vector<int>> nbrs{{0, 1}, {1, 0, 2}, {2}};
  Tape t;
  Var z = t.leaf(random_matrix(rng, 3, 2));
  Var w = t.leaf(random_matrix(rng, 4, 1));
  std::vector<std::vector<double>> sink;
  graph_attention(z, w, &nbrs, 0.2, &sink);
  REQUIRE(sink.size() == 3);
  for (size_t i = 0; i < sink.size(); ++i) {
    double total = 0.0;
    for (double a : sink[i]) {
      CHECK(a >= 0.0);
      total += a;
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("graph attention rejects isolated nodes") {
  Rng rng(2);
  std::vector<std::vector<int>> nbrs{{0}, {}};
  Tape t;
  Var z = t.leaf(random_matrix(rng, 2, 2));
  Var w = t.leaf(random_matrix(rng, 4, 1));
  CHECK_THROWS_AS(graph_attention(z, w, &nbrs, 0.2), EmptyNeighborhoodError);
}

TEST_CASE("forward passes are reproducible with the same seed") {
  auto run = [](uint64_t seed) {
    Rng rng(seed);
    Matrix x = random_matrix(rng, 5, 5);
    Tape t;
    Var v = t.leaf(x);
    Var y = dropout(sigmoid(matmul(v, v)), 0.3, Mode::Train, &rng);
    return Matrix(y.value());
  };
  Matrix a = run(123);
  Matrix b = run(123);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  Matrix c = run(124);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("forward ops keep finite inputs finite") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    Matrix x = random_matrix(rng, 4, 4, 50.0);
    Tape t;
    Var v = t.leaf(x);
    Var y = rowwise_softmax(elu(matmul(v, v)));
    CHECK(y.value().allFinite());
  }
}
