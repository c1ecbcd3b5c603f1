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

#include "dvsdr/core/matrix.hpp"

namespace dvsdr::nn {

inline constexpr double kLogvarMin = -10.0;
inline constexpr double kLogvarMax = 10.0;

/// Clamps log-variances into [kLogvarMin, kLogvarMax].
Matrix clamp_logvar(const Matrix& raw);

/// Passes `upstream` through where `raw` lies inside the clamp range, zero elsewhere.
Matrix clamp_logvar_backward(const Matrix& raw, const Matrix& upstream);

/// KL( N(mu, diag exp(logvar)) || N(0, I) ) averaged over rows, with gradients.
struct KlResult {
  double kl = 0.0;
  Matrix d_mu;
  Matrix d_logvar;
};

KlResult gaussian_kl_diag(const Matrix& mu, const Matrix& logvar);

/// z = mu + exp(logvar / 2) * eps
Matrix reparameterize(const Matrix& mu, const Matrix& logvar, const Matrix& eps);

struct ReparamGrads {
  Matrix d_mu;
  Matrix d_logvar;
};

/// Pulls dL/dz back to (mu, logvar): d_mu = d_z, d_logvar = d_z * exp(logvar / 2) * eps / 2.
ReparamGrads reparameterize_backward(const Matrix& logvar, const Matrix& eps, const Matrix& d_z);

}  // namespace dvsdr::nn
