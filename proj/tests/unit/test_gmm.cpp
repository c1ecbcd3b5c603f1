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
#include <numbers>

#include "doctest.h"
#include "dvsdr/core/errors.hpp"
#include "dvsdr/gmm/gmm.hpp"
#include "support.hpp"

using dvsdr::Matrix;
using dvsdr::Rng;
namespace gmm = dvsdr::gmm;

namespace {

// Mixture density evaluated directly, without log-space tricks.
double naive_log_likelihood(const gmm::GmmModel& m, const Matrix& z) {
  double total = 0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double p = 0;
    for (std::size_t k = 0; k < m.components(); ++k) {
      double density = m.weights[k];
      for (std::size_t j = 0; j < z.cols(); ++j) {
        const double v = m.variances(k, j);
        const double diff = z(i, j) - m.means(k, j);
        density *= std::exp(-0.5 * diff * diff / v) / std::sqrt(2 * std::numbers::pi * v);
      }
      p += density;
    }
    total += std::log(p);
  }
  return total;
}

Matrix two_clusters(Rng& rng, std::size_t n_each) {
  Matrix z(2 * n_each, 2);
  for (std::size_t i = 0; i < 2 * n_each; ++i) {
    const double cx = i < n_each ? -3.0 : 4.0;
    const double cy = i < n_each ? 1.0 : -2.0;
    z(i, 0) = cx + 0.5 * rng.normal();
    z(i, 1) = cy + 0.5 * rng.normal();
  }
  return z;
}

}  // namespace

TEST_CASE("one component recovers the closed-form maximum likelihood estimate") {
  Rng rng(1);
  const Matrix z = testing::random_matrix(rng, 200, 3, -2, 5);
  const gmm::GmmFit fit = gmm::fit_em(z, 1, 0);
  for (std::size_t j = 0; j < 3; ++j) {
    double mean = 0;
    for (std::size_t i = 0; i < 200; ++i) mean += z(i, j);
    mean /= 200;
    double var = 0;
    for (std::size_t i = 0; i < 200; ++i) var += (z(i, j) - mean) * (z(i, j) - mean);
    var /= 200;
    CHECK(std::abs(fit.model.means(0, j) - mean) <= 1e-9);
    CHECK(std::abs(fit.model.variances(0, j) - var) <= 1e-9);
  }
  CHECK(fit.model.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("two separated clusters are recovered") {
  Rng rng(2);
  const Matrix z = two_clusters(rng, 300);
  const gmm::GmmFit fit = gmm::fit_em(z, 2, 7);
  std::size_t left = fit.model.means(0, 0) < fit.model.means(1, 0) ? 0 : 1;
  CHECK(std::abs(fit.model.means(left, 0) + 3.0) <= 0.1);
  CHECK(std::abs(fit.model.means(left, 1) - 1.0) <= 0.1);
  CHECK(std::abs(fit.model.means(1 - left, 0) - 4.0) <= 0.1);
  CHECK(std::abs(fit.model.means(1 - left, 1) + 2.0) <= 0.1);
  CHECK(fit.model.weights[0] == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("EM log-likelihood never decreases on 50 random datasets") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 20 + rng.uniform_index(200);
    const std::size_t d = 1 + rng.uniform_index(4);
    const std::size_t k = 1 + rng.uniform_index(5);
    Matrix z = testing::random_matrix(rng, n, d, -3, 3);
    for (std::size_t i = 0; i < n; ++i) z(i, 0) += 4.0 * static_cast<double>(i % k);
    const gmm::GmmFit fit = gmm::fit_em(z, k, static_cast<std::uint64_t>(trial));
    for (std::size_t t = 1; t < fit.log_likelihood_trace.size(); ++t)
      CHECK(fit.log_likelihood_trace[t] - fit.log_likelihood_trace[t - 1] >= -1e-9);
    double wsum = 0;
    for (double w : fit.model.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : fit.model.variances.values()) CHECK(v >= 1e-6);
    CHECK(gmm::gmm_log_likelihood(fit.model, z) ==
          doctest::Approx(fit.log_likelihood_trace.back()).epsilon(1e-12));
  }
}

TEST_CASE("log-likelihood and responsibilities against a direct evaluation") {
  Rng rng(4);
  const Matrix z = two_clusters(rng, 50);
  const gmm::GmmFit fit = gmm::fit_em(z, 3, 1);
  CHECK(gmm::gmm_log_likelihood(fit.model, z) == doctest::Approx(naive_log_likelihood(fit.model, z)).epsilon(1e-10));
  const Matrix r = gmm::responsibilities(fit.model, z);
  for (std::size_t i = 0; i < r.rows(); ++i) {
    double s = 0;
    for (double v : r.row(i)) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("component sampling") {
  gmm::GmmModel m{{0.5, 0.5}, Matrix{{0, 0}, {10, -5}}, Matrix{{1, 1}, {4, 0.25}}};
  Rng rng(5);
  const Matrix s = gmm::sample_component(m, 1, rng, 20000);
  double mx = 0, my = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    mx += s(i, 0);
    my += s(i, 1);
  }
  mx /= 20000;
  my /= 20000;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    vx += (s(i, 0) - mx) * (s(i, 0) - mx);
    vy += (s(i, 1) - my) * (s(i, 1) - my);
  }
  CHECK(mx == doctest::Approx(10.0).epsilon(0.005));
  CHECK(my == doctest::Approx(-5.0).epsilon(0.005));
  CHECK(vx / 20000 == doctest::Approx(4.0).epsilon(0.05));
  CHECK(vy / 20000 == doctest::Approx(0.25).epsilon(0.05));
  CHECK_THROWS_AS(gmm::sample_component(m, 2, rng, 1), dvsdr::DomainError);
}

TEST_CASE("fit validation and JSON round trip") {
  Rng rng(6);
  const Matrix z = testing::random_matrix(rng, 5, 2);
  CHECK_THROWS_AS(gmm::fit_em(z, 0, 0), dvsdr::DomainError);
  CHECK_THROWS_AS(gmm::fit_em(z, 6, 0), dvsdr::DomainError);
  Matrix bad = z;
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(gmm::fit_em(bad, 2, 0), dvsdr::DomainError);
  // fits are a function of the seed
  const Matrix zz = two_clusters(rng, 40);
  CHECK(gmm::fit_em(zz, 3, 11).model.means == gmm::fit_em(zz, 3, 11).model.means);

  const gmm::GmmModel m = gmm::fit_em(zz, 3, 2).model;
  const gmm::GmmModel back = gmm::from_json(gmm::to_json(m));
  CHECK(back.weights == m.weights);
  CHECK(back.means == m.means);
  CHECK(back.variances == m.variances);
  testing::TempDir dir;
  gmm::save_gmm(m, dir / "g.json");
  CHECK(gmm::load_gmm(dir / "g.json").means == m.means);
  CHECK_THROWS(gmm::from_json("{\"K\": 1}"));
  CHECK_THROWS(gmm::from_json("not json"));
}

TEST_CASE("density formula special cases") {
  const gmm::GmmModel unit{{1.0}, Matrix{{0.5, -1.0}}, Matrix{{1.0, 1.0}}};
  CHECK(gmm::gmm_log_likelihood(unit, Matrix{{0.5, -1.0}}) ==
        doctest::Approx(std::log(1.0 / (2 * std::numbers::pi))).epsilon(1e-14));
  const Matrix one{{0.3, 0.7}};
  const Matrix two{{0.3, 0.7}, {0.3, 0.7}};
  CHECK(gmm::gmm_log_likelihood(unit, two) == doctest::Approx(2 * gmm::gmm_log_likelihood(unit, one)).epsilon(1e-14));
  Rng rng(9);
  const gmm::GmmModel mix{{0.2, 0.8}, Matrix{{0, 1}, {2, 3}}, Matrix{{0.5, 2}, {1, 0.1}}};
  const Matrix z = testing::random_matrix(rng, 40, 2, -2, 4);
  CHECK(std::abs(gmm::gmm_log_likelihood(mix, z) - naive_log_likelihood(mix, z)) <= 1e-9);
}

TEST_CASE("sampling at the variance floor stays at the mean") {
  const gmm::GmmModel tight{{1.0}, Matrix{{1.5, -2.0}}, Matrix{{1e-6, 1e-6}}};
  Rng rng(10);
  const Matrix s = gmm::sample_component(tight, 0, rng, 1000);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    CHECK(std::abs(s(i, 0) - 1.5) <= 3 * std::sqrt(1e-6) * 5);
    CHECK(std::abs(s(i, 1) + 2.0) <= 3 * std::sqrt(1e-6) * 5);
  }
  Rng a(4), b(4);
  CHECK(gmm::sample_component(tight, 0, a, 10) == gmm::sample_component(tight, 0, b, 10));
  const gmm::GmmModel wide{{1.0}, Matrix{{3.0}}, Matrix{{2.0}}};
  const Matrix big = gmm::sample_component(wide, 0, a, 100000);
  double mean = 0;
  for (double v : big.values()) mean += v;
  CHECK(std::abs(mean / 100000 - 3.0) <= 0.05);
}
