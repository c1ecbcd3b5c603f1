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

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "tables.hpp"

namespace dvsdr::simd {
namespace {

constexpr std::size_t kBlockK = 256;
constexpr std::size_t kTileRows = 12;
constexpr std::size_t kTileCols = 16;

inline __mmask8 lane_mask(std::size_t valid) {
  return static_cast<__mmask8>(valid >= 8 ? 0xFFu : (1u << valid) - 1u);
}

// Rows x 16 register tile; up to 24 zmm accumulators.
template <int Rows>
void tile(std::size_t k, const double* a, std::size_t lda, const double* b, std::size_t ldb,
          double* c, std::size_t ldc, std::size_t cols) {
  __m512d acc[Rows][2];
  for (int r = 0; r < Rows; ++r) acc[r][0] = acc[r][1] = _mm512_setzero_pd();

  if (cols == kTileCols) {
    for (std::size_t p = 0; p < k; ++p) {
      const __m512d b0 = _mm512_loadu_pd(b + p * ldb);
      const __m512d b1 = _mm512_loadu_pd(b + p * ldb + 8);
      for (int r = 0; r < Rows; ++r) {
        const __m512d av = _mm512_set1_pd(a[r * lda + p]);
        acc[r][0] = _mm512_fmadd_pd(av, b0, acc[r][0]);
        acc[r][1] = _mm512_fmadd_pd(av, b1, acc[r][1]);
      }
    }
    for (int r = 0; r < Rows; ++r) {
      double* cr = c + r * ldc;
      _mm512_storeu_pd(cr, _mm512_add_pd(_mm512_loadu_pd(cr), acc[r][0]));
      _mm512_storeu_pd(cr + 8, _mm512_add_pd(_mm512_loadu_pd(cr + 8), acc[r][1]));
    }
    return;
  }

  const __mmask8 m0 = lane_mask(std::min<std::size_t>(cols, 8));
  const __mmask8 m1 = lane_mask(cols > 8 ? cols - 8 : 0);
  for (std::size_t p = 0; p < k; ++p) {
    const __m512d b0 = _mm512_maskz_loadu_pd(m0, b + p * ldb);
    const __m512d b1 = _mm512_maskz_loadu_pd(m1, b + p * ldb + 8);
    for (int r = 0; r < Rows; ++r) {
      const __m512d av = _mm512_set1_pd(a[r * lda + p]);
      acc[r][0] = _mm512_fmadd_pd(av, b0, acc[r][0]);
      acc[r][1] = _mm512_fmadd_pd(av, b1, acc[r][1]);
    }
  }
  for (int r = 0; r < Rows; ++r) {
    double* cr = c + r * ldc;
    _mm512_mask_storeu_pd(cr, m0, _mm512_add_pd(_mm512_maskz_loadu_pd(m0, cr), acc[r][0]));
    _mm512_mask_storeu_pd(cr + 8, m1, _mm512_add_pd(_mm512_maskz_loadu_pd(m1, cr + 8), acc[r][1]));
  }
}

void tile_rows(std::size_t rows, std::size_t k, const double* a, std::size_t lda, const double* b,
               std::size_t ldb, double* c, std::size_t ldc, std::size_t cols) {
  switch (rows) {
    case 12: tile<12>(k, a, lda, b, ldb, c, ldc, cols); break;
    case 11: tile<11>(k, a, lda, b, ldb, c, ldc, cols); break;
    case 10: tile<10>(k, a, lda, b, ldb, c, ldc, cols); break;
    case 9: tile<9>(k, a, lda, b, ldb, c, ldc, cols); break;
    case 8: tile<8>(k, a, lda, b, ldb, c, ldc, cols); break;
    case 7: tile<7>(k, a, lda, b, ldb, c, ldc, cols); break;
    case 6: tile<6>(k, a, lda, b, ldb, c, ldc, cols); break;
    case 5: tile<5>(k, a, lda, b, ldb, c, ldc, cols); break;
    case 4: tile<4>(k, a, lda, b, ldb, c, ldc, cols); break;
    case 3: tile<3>(k, a, lda, b, ldb, c, ldc, cols); break;
    case 2: tile<2>(k, a, lda, b, ldb, c, ldc, cols); break;
    default: tile<1>(k, a, lda, b, ldb, c, ldc, cols); break;
  }
}

void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
          const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  for (std::size_t p0 = 0; p0 < k; p0 += kBlockK) {
    const std::size_t kc = std::min(kBlockK, k - p0);
    for (std::size_t j0 = 0; j0 < n; j0 += kTileCols) {
      const std::size_t nc = std::min(kTileCols, n - j0);
      for (std::size_t i0 = 0; i0 < m; i0 += kTileRows) {
        tile_rows(std::min(kTileRows, m - i0), kc, a + i0 * lda + p0, lda, b + p0 * ldb + j0, ldb,
                  c + i0 * ldc + j0, ldc, nc);
      }
    }
  }
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const __m512d va = _mm512_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm512_storeu_pd(y + i, _mm512_fmadd_pd(va, _mm512_loadu_pd(x + i), _mm512_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void relu(std::size_t n, const double* x, double* y) {
  const __m512d zero = _mm512_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m512d xi = _mm512_loadu_pd(x + i);
    const __mmask8 positive = _mm512_cmp_pd_mask(xi, zero, _CMP_GT_OQ);
    _mm512_storeu_pd(y + i, _mm512_maskz_mov_pd(positive, xi));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(std::size_t n, const double* x, const double* dy, double* dx) {
  const __m512d zero = _mm512_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __mmask8 positive = _mm512_cmp_pd_mask(_mm512_loadu_pd(x + i), zero, _CMP_GT_OQ);
    _mm512_storeu_pd(dx + i, _mm512_maskz_loadu_pd(positive, dy + i));
  }
  for (; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

void adam_update(std::size_t n, double* param, const double* grad, double* m, double* v,
                 const AdamCoefficients& c) {
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  const __m512d b1 = _mm512_set1_pd(c.beta1);
  const __m512d b2 = _mm512_set1_pd(c.beta2);
  const __m512d omb1 = _mm512_set1_pd(one_minus_b1);
  const __m512d omb2 = _mm512_set1_pd(one_minus_b2);
  const __m512d bc1 = _mm512_set1_pd(c.bias_correction1);
  const __m512d bc2 = _mm512_set1_pd(c.bias_correction2);
  const __m512d lr = _mm512_set1_pd(c.lr);
  const __m512d eps = _mm512_set1_pd(c.epsilon);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m512d g = _mm512_loadu_pd(grad + i);
    const __m512d mi = _mm512_add_pd(_mm512_mul_pd(b1, _mm512_loadu_pd(m + i)), _mm512_mul_pd(omb1, g));
    const __m512d vi = _mm512_add_pd(_mm512_mul_pd(b2, _mm512_loadu_pd(v + i)),
                                     _mm512_mul_pd(omb2, _mm512_mul_pd(g, g)));
    _mm512_storeu_pd(m + i, mi);
    _mm512_storeu_pd(v + i, vi);
    const __m512d m_hat = _mm512_div_pd(mi, bc1);
    const __m512d v_hat = _mm512_div_pd(vi, bc2);
    const __m512d step = _mm512_div_pd(_mm512_mul_pd(lr, m_hat), _mm512_add_pd(_mm512_sqrt_pd(v_hat), eps));
    _mm512_storeu_pd(param + i, _mm512_sub_pd(_mm512_loadu_pd(param + i), step));
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + one_minus_b1 * g;
    v[i] = c.beta2 * v[i] + one_minus_b2 * (g * g);
    param[i] -= c.lr * (m[i] / c.bias_correction1) / (std::sqrt(v[i] / c.bias_correction2) + c.epsilon);
  }
}

}  // namespace

namespace detail {
const KernelTable kAvx512Table{Isa::avx512, gemm, axpy, relu, relu_backward, adam_update};
}  // namespace detail

}  // namespace dvsdr::simd
