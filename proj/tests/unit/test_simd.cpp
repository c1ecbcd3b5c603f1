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

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "dvsdr/core/rng.hpp"
#include "dvsdr/simd/kernels.hpp"

using dvsdr::Rng;
namespace simd = dvsdr::simd;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
  return v;
}

const simd::KernelTable& scalar() { return *simd::table_for(simd::Isa::scalar); }

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("scalar kernels are always available and listed") {
  REQUIRE(simd::table_for(simd::Isa::scalar) != nullptr);
  const auto isas = simd::available_isas();
  CHECK(std::find(isas.begin(), isas.end(), simd::Isa::scalar) != isas.end());
  CHECK(simd::table_for(simd::active().isa) != nullptr);
  CHECK(simd::isa_name(simd::Isa::avx2) == "avx2");
}

TEST_CASE("DVSDR_SIMD selects the kernel set when supported") {
  const char* forced = std::getenv("DVSDR_SIMD");
  if (forced == nullptr) return;
  const auto isas = simd::available_isas();
  const bool supported = std::any_of(isas.begin(), isas.end(),
                                     [&](simd::Isa i) { return simd::isa_name(i) == forced; });
  if (supported) {
    CHECK(simd::isa_name(simd::active().isa) == forced);
  } else {
    CHECK(simd::table_for(simd::active().isa) != nullptr);
  }
}

TEST_CASE("every available kernel set matches the scalar reference") {
  for (simd::Isa isa : simd::available_isas()) {
    const simd::KernelTable& t = *simd::table_for(isa);
    CAPTURE(simd::isa_name(isa));
    Rng rng(17);

    SUBCASE("gemm with strided operands and accumulation") {
      const std::size_t shapes[][3] = {{1, 1, 1},   {3, 5, 7},    {6, 8, 256}, {13, 17, 300},
                                       {12, 16, 1}, {25, 33, 513}, {64, 64, 64}};
      for (const auto& s : shapes) {
        const std::size_t m = s[0], n = s[1], k = s[2];
        const std::size_t lda = k + 3, ldb = n + 2, ldc = n + 5;
        const auto a = random_vector(rng, m * lda);
        const auto b = random_vector(rng, k * ldb);
        const auto c0 = random_vector(rng, m * ldc);
        auto c_ref = c0, c_simd = c0;
        scalar().gemm(m, n, k, a.data(), lda, b.data(), ldb, c_ref.data(), ldc);
        t.gemm(m, n, k, a.data(), lda, b.data(), ldb, c_simd.data(), ldc);
        CHECK(max_diff(c_ref, c_simd) <= 1e-12 * static_cast<double>(k));
        // padding columns beyond n must be untouched
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = n; j < ldc; ++j) CHECK(c_simd[i * ldc + j] == c0[i * ldc + j]);
      }
    }

    SUBCASE("elementwise kernels across tail lengths") {
      for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 15u, 16u, 17u, 33u, 1000u}) {
        const auto x = random_vector(rng, n);
        const auto dy = random_vector(rng, n);
        auto y_ref = random_vector(rng, n);
        auto y_simd = y_ref;
        scalar().axpy(n, 0.37, x.data(), y_ref.data());
        t.axpy(n, 0.37, x.data(), y_simd.data());
        CHECK(max_diff(y_ref, y_simd) <= 1e-15);

        std::vector<double> r_ref(n), r_simd(n);
        scalar().relu(n, x.data(), r_ref.data());
        t.relu(n, x.data(), r_simd.data());
        CHECK(r_ref == r_simd);
        scalar().relu_backward(n, x.data(), dy.data(), r_ref.data());
        t.relu_backward(n, x.data(), dy.data(), r_simd.data());
        CHECK(r_ref == r_simd);

        const simd::AdamCoefficients coef{1e-3, 0.9, 0.999, 1e-8, 1 - 0.9 * 0.9, 1 - 0.999 * 0.999};
        auto p_ref = random_vector(rng, n), m_ref = random_vector(rng, n), v_ref = random_vector(rng, n);
        for (double& v : v_ref) v = std::abs(v);
        auto p_simd = p_ref, m_simd = m_ref, v_simd = v_ref;
        scalar().adam_update(n, p_ref.data(), dy.data(), m_ref.data(), v_ref.data(), coef);
        t.adam_update(n, p_simd.data(), dy.data(), m_simd.data(), v_simd.data(), coef);
        CHECK(max_diff(p_ref, p_simd) <= 1e-15);
        CHECK(max_diff(m_ref, m_simd) <= 1e-15);
        CHECK(max_diff(v_ref, v_simd) <= 1e-15);
      }
    }
  }
}

TEST_CASE("relu derivative at zero is zero") {
  for (simd::Isa isa : simd::available_isas()) {
    const simd::KernelTable& t = *simd::table_for(isa);
    const double x[] = {0.0, -0.0, 1e-300, -1e-300};
    const double dy[] = {1.0, 1.0, 1.0, 1.0};
    double dx[4];
    t.relu_backward(4, x, dy, dx);
    CHECK(dx[0] == 0.0);
    CHECK(dx[1] == 0.0);
    CHECK(dx[2] == 1.0);
    CHECK(dx[3] == 0.0);
  }
}
