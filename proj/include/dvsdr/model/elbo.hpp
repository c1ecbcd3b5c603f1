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

#include <optional>
#include <span>

#include "dvsdr/core/matrix.hpp"
#include "dvsdr/core/rng.hpp"
#include "dvsdr/model/model.hpp"

namespace dvsdr::model {

/// Batch-mean terms of the bound.
struct ElboTerms {
  double recon_ll = 0.0;           // E_q[log p(x|z)]
  std::optional<double> class_ll;  // E_q[log p(y|z)], labeled batches only
  double kl = 0.0;                 // KL(q(z|x) || N(0, I))
  double total = 0.0;              // recon_ll + alpha * class_ll - kl
};

struct ElboResult {
  ElboTerms terms;
  ParamGrads grads;  // gradient of -total
  Matrix z;          // the latent sample used
};

/// Standard normal noise for a batch x latent_dim reparameterization.
Matrix draw_eps(Rng& rng, std::size_t rows, std::size_t cols);

/// Labeled bound on log p(x, y) with one reparameterized sample per row.
ElboResult elbo_labeled(const DvsdrModel& model, const Matrix& x, std::span<const int> labels,
                        const Matrix& eps, double alpha = 1.0);
ElboResult elbo_labeled(const DvsdrModel& model, const Matrix& x, std::span<const int> labels,
                        Rng& rng, double alpha = 1.0);

/// Unlabeled bound on log p(x). Classifier gradients are zero.
ElboResult elbo_unlabeled(const DvsdrModel& model, const Matrix& x, const Matrix& eps);
ElboResult elbo_unlabeled(const DvsdrModel& model, const Matrix& x, Rng& rng);

}  // namespace dvsdr::model
