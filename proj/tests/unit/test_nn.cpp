// Copyright 2026 the dvsdr authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <functional>
#include <limits>

#include "doctest.h"
#include "dvsdr/core/errors.hpp"
#include "dvsdr/nn/gaussian.hpp"
#include "dvsdr/nn/layers.hpp"
#include "dvsdr/nn/losses.hpp"
#include "support.hpp"

using dvsdr::Matrix;
using dvsdr::Rng;
namespace nn = dvsdr::nn;

namespace {

constexpr double kH = 1e-5;

// Central differences of a scalar function with respect to every entry of m.
Matrix numeric_grad(Matrix& m, const std::function<double()>& f) {
  Matrix g(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double saved = m.values()[i];
    m.values()[i] = saved + kH;
    const double up = f();
    m.values()[i] = saved - kH;
    const double down = f();
    m.values()[i] = saved;
    g.values()[i] = (up - down) / (2 * kH);
  }
  return g;
}

double max_rel(const Matrix& a, const Matrix& b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, testing::relative_error(a.values()[i], b.values()[i]));
  return worst;
}

double dot(const Matrix& a, const Matrix& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
  return s;
}

}  // namespace

TEST_CASE("affine layer forward against a hand computation") {
  nn::AffineLayer layer{Matrix{{1, 2, 3}, {0, -1, 1}}, {0.5, -0.5}};
  const Matrix x{{1, 1, 1}, {2, 0, -1}};
  CHECK(nn::affine_forward(layer, x) == Matrix{{6.5, -0.5}, {-0.5, -1.5}});
  CHECK_THROWS_AS(nn::affine_forward(layer, Matrix(1, 2)), dvsdr::ShapeError);
}

TEST_CASE("affine backward matches finite differences") {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    nn::AffineLayer layer{testing::random_matrix(rng, 4, 3), {0.1, -0.2, 0.3, 0.0}};
    Matrix x = testing::random_matrix(rng, 5, 3);
    const Matrix probe = testing::random_matrix(rng, 5, 4);
    auto f = [&] { return dot(nn::affine_forward(layer, x), probe); };
    const nn::LayerGrads g = nn::affine_backward(layer, x, probe);
    CHECK(max_rel(g.d_weight, numeric_grad(layer.weight, f)) <= 1e-6);
    CHECK(max_rel(g.d_input, numeric_grad(x, f)) <= 1e-6);
    Matrix bias(1, 4, layer.bias);
    auto fb = [&] {
      layer.bias.assign(bias.values().begin(), bias.values().end());
      return f();
    };
    const Matrix db = numeric_grad(bias, fb);
    for (std::size_t j = 0; j < 4; ++j) CHECK(testing::relative_error(g.d_bias[j], db(0, j)) <= 1e-6);
    CHECK(nn::affine_backward(layer, x, probe, false).d_input.empty());
  }
}

TEST_CASE("activations and their derivatives") {
  Rng rng(2);
  Matrix x = testing::random_matrix(rng, 4, 6, -3, 3);
  x(0, 0) = 0.0;
  const Matrix probe = testing::random_matrix(rng, 4, 6);
  for (nn::Activation kind : {nn::Activation::relu, nn::Activation::sigmoid}) {
    Matrix xs = x;
    if (kind == nn::Activation::relu) xs(0, 0) = 0.5;  // keep FD away from the kink
    auto f = [&] { return dot(nn::activation_forward(kind, xs), probe); };
    const Matrix analytic = nn::activation_backward(kind, xs, probe);
    CHECK(max_rel(analytic, numeric_grad(xs, f)) <= 1e-6);
    const nn::Activated a = nn::activate(kind, xs);
    CHECK(a.output == nn::activation_forward(kind, xs));
    CHECK(a.backward(probe) == analytic);
  }
  CHECK(nn::activation_backward(nn::Activation::relu, Matrix{{0.0}}, Matrix{{1.0}})(0, 0) == 0.0);
  CHECK(nn::sigmoid(0.0) == 0.5);
  CHECK(nn::sigmoid(-800.0) >= 0.0);
  CHECK(nn::sigmoid(800.0) == 1.0);
  CHECK(std::isfinite(nn::sigmoid(-800.0)));
}

TEST_CASE("uniform logits give cross-entropy ln C") {
  const Matrix logits(3, 10, 0.25);
  const int labels[] = {0, 4, 9};
  CHECK(std::abs(nn::softmax_cross_entropy(logits, labels).loss - std::log(10.0)) <= 1e-12);
}

TEST_CASE("softmax cross-entropy gradient and stability") {
  Rng rng(3);
  Matrix logits = testing::random_matrix(rng, 6, 4, -4, 4);
  const std::vector<int> labels = testing::random_labels(rng, 6, 4);
  auto f = [&] { return nn::softmax_cross_entropy(logits, labels).loss; };
  CHECK(max_rel(nn::softmax_cross_entropy(logits, labels).d_logits, numeric_grad(logits, f)) <= 1e-6);

  const Matrix p = nn::softmax(logits);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double s = 0;
    for (double v : p.row(i)) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }
  const Matrix huge{{1000.0, 0.0}, {-1000.0, 0.0}};
  const int y[] = {1, 0};
  const auto r = nn::softmax_cross_entropy(huge, y);
  CHECK(r.loss == doctest::Approx(1000.0).epsilon(1e-12));
  CHECK(dvsdr::all_finite(r.d_logits));
  const int bad[] = {0, 2};
  CHECK_THROWS_AS(nn::softmax_cross_entropy(huge, bad), dvsdr::DomainError);
  const int negative[] = {-1, 0};
  CHECK_THROWS_AS(nn::softmax_cross_entropy(huge, negative), dvsdr::DomainError);
}

TEST_CASE("bernoulli likelihood on logits") {
  CHECK(nn::softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(nn::softplus(800.0) == 800.0);
  CHECK(nn::softplus(-800.0) >= 0.0);
  CHECK(nn::softplus(-800.0) < 1e-300);

  // direct formula at moderate logits
  Rng rng(4);
  Matrix logits = testing::random_matrix(rng, 3, 5, -5, 5);
  const Matrix targets = testing::random_matrix(rng, 3, 5, 0, 1);
  double direct = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-logits.values()[i]));
    const double t = targets.values()[i];
    direct -= t * std::log(p) + (1 - t) * std::log(1 - p);
  }
  CHECK(nn::bernoulli_nll(logits, targets).loss == doctest::Approx(direct / 3).epsilon(1e-12));
  auto f = [&] { return nn::bernoulli_nll(logits, targets).loss; };
  CHECK(max_rel(nn::bernoulli_nll(logits, targets).d_logits, numeric_grad(logits, f)) <= 1e-6);

  const Matrix extreme{{1e4, -1e4}};
  const auto r = nn::bernoulli_nll(extreme, Matrix{{0.0, 1.0}});
  CHECK(r.loss == doctest::Approx(2e4));
  CHECK(dvsdr::all_finite(r.d_logits));
  CHECK_THROWS_AS(nn::bernoulli_nll(extreme, Matrix{{1.5, 0.0}}), dvsdr::DomainError);
  CHECK_THROWS_AS(nn::bernoulli_nll(extreme, Matrix{{std::nan(""), 0.0}}), dvsdr::DomainError);
}

TEST_CASE("gaussian KL closed-form values") {
  CHECK(std::abs(nn::gaussian_kl_diag(Matrix(4, 7), Matrix(4, 7)).kl) <= 1e-12);
  CHECK(std::abs(nn::gaussian_kl_diag(Matrix{{1.0}}, Matrix{{0.0}}).kl - 0.5) <= 1e-12);
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix mu = testing::random_matrix(rng, 3, 4, -2, 2);
    const Matrix lv = testing::random_matrix(rng, 3, 4, -3, 3);
    CHECK(nn::gaussian_kl_diag(mu, lv).kl >= 0.0);
    // per-dimension oracle: 0.5 (sigma^2 + mu^2 - 1 - log sigma^2)
    double s = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const double v = std::exp(lv.values()[i]);
      s += 0.5 * (v + mu.values()[i] * mu.values()[i] - 1.0 - lv.values()[i]);
    }
    CHECK(nn::gaussian_kl_diag(mu, lv).kl == doctest::Approx(s / 3).epsilon(1e-12));
  }
}

TEST_CASE("gaussian KL gradients") {
  Rng rng(6);
  Matrix mu = testing::random_matrix(rng, 3, 2);
  Matrix lv = testing::random_matrix(rng, 3, 2);
  const nn::KlResult r = nn::gaussian_kl_diag(mu, lv);
  CHECK(max_rel(r.d_mu, numeric_grad(mu, [&] { return nn::gaussian_kl_diag(mu, lv).kl; })) <= 1e-6);
  CHECK(max_rel(r.d_logvar, numeric_grad(lv, [&] { return nn::gaussian_kl_diag(mu, lv).kl; })) <= 1e-6);
}

TEST_CASE("reparameterization") {
  const Matrix mu{{1.0, -2.0}};
  const Matrix lv{{0.0, std::log(4.0)}};
  const Matrix eps{{0.5, 1.0}};
  const Matrix z = nn::reparameterize(mu, lv, eps);
  CHECK(z(0, 0) == doctest::Approx(1.5));
  CHECK(z(0, 1) == doctest::Approx(0.0));
  CHECK(nn::reparameterize(mu, lv, Matrix(1, 2)) == mu);

  Rng rng(7);
  Matrix m = testing::random_matrix(rng, 3, 2);
  Matrix l = testing::random_matrix(rng, 3, 2);
  const Matrix e = testing::random_matrix(rng, 3, 2);
  const Matrix probe = testing::random_matrix(rng, 3, 2);
  auto f = [&] { return dot(nn::reparameterize(m, l, e), probe); };
  const nn::ReparamGrads g = nn::reparameterize_backward(l, e, probe);
  CHECK(max_rel(g.d_mu, numeric_grad(m, f)) <= 1e-6);
  CHECK(max_rel(g.d_logvar, numeric_grad(l, f)) <= 1e-6);
}

TEST_CASE("log-variance clamp") {
  const Matrix raw{{-20.0, -10.0, 0.3, 10.0, 25.0}};
  const Matrix clamped = nn::clamp_logvar(raw);
  CHECK(clamped == Matrix{{-10.0, -10.0, 0.3, 10.0, 10.0}});
  const Matrix g = nn::clamp_logvar_backward(raw, Matrix(1, 5, 1.0));
  CHECK(g(0, 0) == 0.0);
  CHECK(g(0, 2) == 1.0);
  CHECK(g(0, 4) == 0.0);
}

TEST_CASE("affine layer special cases") {
  Rng rng(21);
  const Matrix x = testing::random_matrix(rng, 4, 3);
  CHECK(nn::affine_forward({Matrix::identity(3), {0, 0, 0}}, x) == x);
  const nn::AffineLayer layer{testing::random_matrix(rng, 5, 3), {1, 2, 3, 4, 5}};
  const Matrix zero_out = nn::affine_forward(layer, Matrix(2, 3));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 5; ++j) CHECK(zero_out(i, j) == layer.bias[j]);

  // 3x5 input against a plain loop
  const nn::AffineLayer l2{testing::random_matrix(rng, 4, 5), {0.5, -1, 2, 0}};
  const Matrix x2 = testing::random_matrix(rng, 3, 5);
  const Matrix y = nn::affine_forward(l2, x2);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t o = 0; o < 4; ++o) {
      double s = l2.bias[o];
      for (std::size_t k = 0; k < 5; ++k) s += l2.weight(o, k) * x2(i, k);
      CHECK(std::abs(y(i, o) - s) <= 1e-12);
    }

  const nn::LayerGrads zero = nn::affine_backward(l2, x2, Matrix(3, 4));
  CHECK(zero.d_weight == Matrix(4, 5));
  CHECK(zero.d_input == Matrix(3, 5));
  for (double v : zero.d_bias) CHECK(v == 0.0);

  const nn::LayerGrads scalar = nn::affine_backward({Matrix{{0.7}}, {0.0}}, Matrix{{3.0}}, Matrix{{2.0}});
  CHECK(scalar.d_weight(0, 0) == 6.0);
  CHECK(scalar.d_input(0, 0) == doctest::Approx(1.4));
  CHECK(scalar.d_bias[0] == 2.0);
}

TEST_CASE("relu values") {
  const Matrix y = nn::activation_forward(nn::Activation::relu, Matrix{{-1.0, 2.0, 0.0}});
  CHECK(y == Matrix{{0.0, 2.0, 0.0}});
}

TEST_CASE("cross-entropy falls toward zero as the true logit grows") {
  const int y[] = {2};
  double prev = std::numeric_limits<double>::infinity();
  for (double l = 0.0; l <= 60.0; l += 5.0) {
    const double loss = nn::softmax_cross_entropy(Matrix{{0.0, 1.0, l}}, y).loss;
    CHECK(loss < prev);
    prev = loss;
  }
  CHECK(prev < 1e-20);
}

TEST_CASE("bernoulli special values") {
  const auto half = nn::bernoulli_nll(Matrix(2, 5, 0.0), Matrix(2, 5, 0.5));
  CHECK(std::abs(half.loss - 5 * std::log(2.0)) <= 1e-12);  // per image: 5 pixels of ln 2
  double prev = std::numeric_limits<double>::infinity();
  for (double l = 0.0; l <= 40.0; l += 4.0) {
    const double loss = nn::bernoulli_nll(Matrix{{l}}, Matrix{{1.0}}).loss;
    CHECK(loss < prev);
    prev = loss;
  }
  CHECK(prev < 1e-16);
}

TEST_CASE("reparameterization with unit variance adds the noise") {
  const Matrix mu{{0.25, -1.0}};
  const Matrix e{{0.5, 2.0}};
  CHECK(nn::reparameterize(mu, Matrix(1, 2), e) == mu + e);
}
