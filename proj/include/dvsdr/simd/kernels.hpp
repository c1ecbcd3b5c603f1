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

#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

// Inner-loop kernels with one scalar reference implementation and optional
// AVX2 and AVX-512 variants. The variant is chosen once at startup from CPUID
// and can be pinned with the DVSDR_SIMD environment variable
// (scalar | avx2 | avx512). Variants agree up to floating-point reassociation;
// within one variant every kernel is deterministic.

namespace dvsdr::simd {

enum class Isa { scalar, avx2, avx512 };

std::string_view isa_name(Isa isa) noexcept;

/// Per-step Adam constants. bias_correction1 = 1 - beta1^t, bias_correction2 = 1 - beta2^t.
struct AdamCoefficients {
  double lr;
  double beta1;
  double beta2;
  double epsilon;
  double bias_correction1;
  double bias_correction2;
};

struct KernelTable {
  Isa isa;

  /// C[m x n] += A[m x k] * B[k x n], all row-major with leading dimensions.
  void (*gemm)(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
               const double* b, std::size_t ldb, double* c, std::size_t ldc);

  /// y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);

  /// y = max(x, 0)
  void (*relu)(std::size_t n, const double* x, double* y);

  /// dx = dy where x > 0, else 0 (the derivative at exactly 0 is 0).
  void (*relu_backward)(std::size_t n, const double* x, const double* dy, double* dx);

  /// m = b1 m + (1-b1) g;  v = b2 v + (1-b2) g^2;
  /// param -= lr * (m / bc1) / (sqrt(v / bc2) + eps)
  void (*adam_update)(std::size_t n, double* param, const double* grad, double* m, double* v,
                      const AdamCoefficients& c);
};

/// The kernels used by the library.
const KernelTable& active() noexcept;

/// The table for `isa`, or nullptr if it was not compiled in or the CPU lacks it.
const KernelTable* table_for(Isa isa) noexcept;

/// Every variant usable on this machine, scalar first.
std::vector<Isa> available_isas();

}  // namespace dvsdr::simd
