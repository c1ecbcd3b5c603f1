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

#include "dvsdr/nn/gaussian.hpp"

#include <algorithm>
#include <cmath>

#include "dvsdr/core/errors.hpp"

namespace dvsdr::nn {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shapes " + a.shape_string() + " and " +
                     b.shape_string() + " differ");
  }
}

}  // namespace

Matrix clamp_logvar(const Matrix& raw) {
  Matrix out = raw;
  for (double& v : out.values()) v = std::clamp(v, kLogvarMin, kLogvarMax);
  return out;
}

Matrix clamp_logvar_backward(const Matrix& raw, const Matrix& upstream) {
  require_same_shape(raw, upstream, "clamp_logvar_backward");
  Matrix out = upstream;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = raw.values()[i];
    if (v < kLogvarMin || v > kLogvarMax) out.values()[i] = 0.0;
  }
  return out;
}

KlResult gaussian_kl_diag(const Matrix& mu, const Matrix& logvar) {
  require_same_shape(mu, logvar, "gaussian_kl_diag");
  KlResult out{0.0, Matrix(mu.rows(), mu.cols()), Matrix(mu.rows(), mu.cols())};
  if (mu.rows() == 0) return out;
  const double inv_batch = 1.0 / static_cast<double>(mu.rows());
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double m = mu.values()[i];
    const double lv = logvar.values()[i];
    const double var = std::exp(lv);
    // expm1(lv) - lv is exp(lv) - 1 - lv without cancellation near zero.
    total += 0.5 * (m * m + (std::expm1(lv) - lv));
    out.d_mu.values()[i] = m * inv_batch;
    out.d_logvar.values()[i] = 0.5 * (var - 1.0) * inv_batch;
  }
  out.kl = total * inv_batch;
  return out;
}

Matrix reparameterize(const Matrix& mu, const Matrix& logvar, const Matrix& eps) {
  require_same_shape(mu, logvar, "reparameterize");
  require_same_shape(mu, eps, "reparameterize");
  Matrix z(mu.rows(), mu.cols());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z.values()[i] = mu.values()[i] + std::exp(0.5 * logvar.values()[i]) * eps.values()[i];
  }
  return z;
}

ReparamGrads reparameterize_backward(const Matrix& logvar, const Matrix& eps, const Matrix& d_z) {
  require_same_shape(logvar, eps, "reparameterize_backward");
  require_same_shape(logvar, d_z, "reparameterize_backward");
  ReparamGrads g{d_z, Matrix(d_z.rows(), d_z.cols())};
  for (std::size_t i = 0; i < d_z.size(); ++i) {
    g.d_logvar.values()[i] =
        d_z.values()[i] * 0.5 * std::exp(0.5 * logvar.values()[i]) * eps.values()[i];
  }
  return g;
}

}  // namespace dvsdr::nn
