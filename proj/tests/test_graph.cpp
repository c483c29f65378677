#include "adaptgen/graph.hpp"
#include <stdexcept>

#include "adaptgen/model.hpp"
#include "adaptgen/params.hpp"
#include "adaptgen/rng.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace adaptgen;

namespace {

Matrix<double> random_matrix(DeterministicRng& rng, Eigen::Index r, Eigen::Index c, double a = 0.5) {
  Matrix<double> m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.symmetric(a);
  }
  return m;
}

}  // namespace

TEST_CASE("softmax rows are normalized and masked entries vanish") {
  Graph<double> g;
  DeterministicRng rng(1);
  auto x = g.input(random_matrix(rng, 3, 5), false);
  Matrix<double> mask = Matrix<double>::Zero(3, 5);
  mask(0, 4) = -1e9;
  auto p = g.softmax_rows(x, &mask);
  for (Eigen::Index r = 0; r < 3; ++r) {
    CHECK(g.value(p).row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(g.value(p)(0, 4) == doctest::Approx(0.0));
}

TEST_CASE("gradients of a composite graph match finite differences") {
  // exercises matmul, matmul_nt, add, add_rowvec, scale, affine, relu,
  // softmax, layer_norm, rows, slice/concat, mean_rows, cross entropy
  ParamStore<double> params;
  DeterministicRng rng(7);
  params.add("emb", 11, 6) = random_matrix(rng, 11, 6);
  params.add("w1", 6, 8) = random_matrix(rng, 6, 8);
  params.add("b1", 1, 8) = random_matrix(rng, 1, 8);
  params.add("w2", 8, 6) = random_matrix(rng, 8, 6);
  params.add("ln.g", 1, 6) = random_matrix(rng, 1, 6).array() + 1.0;
  params.add("ln.b", 1, 6) = random_matrix(rng, 1, 6);
  params.add("out", 6, 11) = random_matrix(rng, 6, 11);

  const std::vector<int> ids = {1, 4, 9, 2};
  const std::vector<int> targets = {4, 9, 2, 0};
  const std::vector<bool> active = {true, true, true, false};
  Matrix<double> mask = Matrix<double>::Zero(4, 4);
  mask(0, 3) = -1e9;

  auto build_loss = [&](Graph<double>& g, BoundParams<double>& p) {
    auto x = g.rows(p("emb"), ids);
    auto h = g.relu(g.add_rowvec(g.matmul(x, p("w1")), p("b1")));
    auto h2 = g.matmul(h, p("w2"));
    auto attn = g.softmax_rows(g.scale(g.matmul_nt(x, x), 0.4), &mask);
    auto mixed = g.add(h2, g.matmul(attn, x));
    auto normed = g.layer_norm(mixed, p("ln.g"), p("ln.b"));
    auto a = g.slice_cols(normed, 0, 3);
    auto b = g.slice_cols(normed, 3, 3);
    auto recombined = g.concat_cols({a, b});
    auto pooled = g.mean_rows(recombined);
    auto shifted = g.add_rowvec(recombined, g.affine(pooled, 0.3, 0.01));
    auto z = g.matmul(shifted, p("out"));
    return g.cross_entropy_rows(z, targets, active);
  };

  GradMap<double> grads;
  double loss0;
  {
    Graph<double> g;
    BoundParams<double> p(g, params, true);
    auto loss = build_loss(g, p);
    loss0 = g.value(loss)(0, 0);
    g.backward(loss);
    p.harvest(grads);
  }
  CHECK(std::isfinite(loss0));

  auto forward = [&] {
    Graph<double> g;
    BoundParams<double> p(g, params, false);
    return g.value(build_loss(g, p))(0, 0);
  };
  const auto res = testutil::finite_difference_check(params, grads, forward, 1e-4);
  INFO("worst tensor: ", res.worst_tensor);
  CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("cross entropy anchors") {
  Graph<double> g;
  auto uniform = g.input(Matrix<double>::Zero(3, 16), false);
  auto loss = g.cross_entropy_rows(uniform, {0, 5, 15}, {true, true, true});
  CHECK(g.value(loss)(0, 0) == doctest::Approx(std::log(16.0)).epsilon(1e-4));

  Matrix<double> confident = Matrix<double>::Zero(2, 16);
  confident(0, 3) = 1e4;
  confident(1, 7) = 1e4;
  auto sharp = g.input(confident, false);
  auto loss2 = g.cross_entropy_rows(sharp, {3, 7}, {true, true});
  CHECK(g.value(loss2)(0, 0) < 1e-3);

  CHECK_THROWS_AS(g.cross_entropy_rows(uniform, {0, 5, 15}, {false, false, false}),
                  std::runtime_error);
}

TEST_CASE("pad rows excluded from the loss get no gradient") {
  ParamStore<double> params;
  DeterministicRng rng(3);
  params.add("z", 3, 4) = random_matrix(rng, 3, 4);
  Graph<double> g;
  BoundParams<double> p(g, params, true);
  auto z = p("z");
  auto loss = g.cross_entropy_rows(z, {1, 2, 0}, {true, false, true});
  g.backward(loss);
  CHECK(g.grad(z).row(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backward accumulates through shared subexpressions") {
  Graph<double> g;
  Matrix<double> v(1, 1);
  v(0, 0) = 3.0;
  auto x = g.input(v, true);
  auto y = g.add(x, x);  // dy/dx = 2
  auto loss = g.affine(y, 2.0, 1.0);
  g.backward(loss);
  CHECK(g.grad(x)(0, 0) == doctest::Approx(4.0));
}
