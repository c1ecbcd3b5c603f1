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

#include "dvsdr/model/elbo.hpp"

#include <algorithm>

#include "dvsdr/core/errors.hpp"
#include "dvsdr/nn/gaussian.hpp"
#include "dvsdr/nn/losses.hpp"

namespace dvsdr::model {
namespace {

Matrix join_columns(const Matrix& left, const Matrix& right) {
  Matrix out(left.rows(), left.cols() + right.cols());
  for (std::size_t r = 0; r < left.rows(); ++r) {
    auto dst = out.row(r);
    std::copy(left.row(r).begin(), left.row(r).end(), dst.begin());
    std::copy(right.row(r).begin(), right.row(r).end(), dst.begin() + left.cols());
  }
  return out;
}

// Shared path for both bounds; `labels` is null for the unlabeled bound.
ElboResult evaluate_bound(const DvsdrModel& model, const Matrix& x,
                          const std::span<const int>* labels, const Matrix& eps, double alpha) {
  const ModelConfig& cfg = model.config;
  const std::size_t d = cfg.latent_dim;
  if (x.cols() != cfg.input_dim) {
    throw ShapeError("elbo: input " + x.shape_string() + " but model expects " +
                     std::to_string(cfg.input_dim) + " columns");
  }
  if (eps.rows() != x.rows() || eps.cols() != d) {
    throw ShapeError("elbo: noise " + eps.shape_string() + " does not match batch " +
                     std::to_string(x.rows()) + " x latent " + std::to_string(d));
  }
  if (x.rows() == 0) throw DomainError("elbo: empty batch");

  MlpTrace enc_trace;
  const Matrix head = mlp_forward(model.params.encoder, x, &enc_trace);
  const Matrix mu = column_slice(head, 0, d);
  const Matrix raw_logvar = column_slice(head, d, d);
  const Matrix logvar = nn::clamp_logvar(raw_logvar);
  Matrix z = nn::reparameterize(mu, logvar, eps);

  MlpTrace dec_trace;
  const Matrix pixel_logits = mlp_forward(model.params.decoder, z, &dec_trace);
  const nn::LossAndGrad recon = nn::bernoulli_nll(pixel_logits, x);
  const nn::KlResult kl = nn::gaussian_kl_diag(mu, logvar);

  ElboResult out;
  out.grads = zeros_like(model.params);
  out.terms.recon_ll = -recon.loss;
  out.terms.kl = kl.kl;
  out.terms.total = out.terms.recon_ll - out.terms.kl;

  Matrix d_z = mlp_backward(model.params.decoder, dec_trace, recon.d_logits, out.grads.decoder, true);

  if (labels != nullptr) {
    MlpTrace cls_trace;
    const Matrix class_logits = mlp_forward(model.params.classifier, z, &cls_trace);
    const nn::LossAndGrad ce = nn::softmax_cross_entropy(class_logits, *labels);
    out.terms.class_ll = -ce.loss;
    out.terms.total += alpha * *out.terms.class_ll;
    const Matrix d_class = mlp_backward(model.params.classifier, cls_trace, alpha * ce.d_logits,
                                        out.grads.classifier, true);
    add_scaled(d_z, 1.0, d_class);
  }

  nn::ReparamGrads through = nn::reparameterize_backward(logvar, eps, d_z);
  add_scaled(through.d_mu, 1.0, kl.d_mu);
  add_scaled(through.d_logvar, 1.0, kl.d_logvar);
  const Matrix d_raw_logvar = nn::clamp_logvar_backward(raw_logvar, through.d_logvar);
  mlp_backward(model.params.encoder, enc_trace, join_columns(through.d_mu, d_raw_logvar),
               out.grads.encoder, false);

  out.z = std::move(z);
  return out;
}

}  // namespace

Matrix draw_eps(Rng& rng, std::size_t rows, std::size_t cols) {
  return Matrix(rows, cols, sample_standard_normal(rng, rows * cols));
}

ElboResult elbo_labeled(const DvsdrModel& model, const Matrix& x, std::span<const int> labels,
                        const Matrix& eps, double alpha) {
  return evaluate_bound(model, x, &labels, eps, alpha);
}

ElboResult elbo_labeled(const DvsdrModel& model, const Matrix& x, std::span<const int> labels,
                        Rng& rng, double alpha) {
  return elbo_labeled(model, x, labels, draw_eps(rng, x.rows(), model.config.latent_dim), alpha);
}

ElboResult elbo_unlabeled(const DvsdrModel& model, const Matrix& x, const Matrix& eps) {
  return evaluate_bound(model, x, nullptr, eps, 1.0);
}

ElboResult elbo_unlabeled(const DvsdrModel& model, const Matrix& x, Rng& rng) {
  return elbo_unlabeled(model, x, draw_eps(rng, x.rows(), model.config.latent_dim));
}

}  // namespace dvsdr::model
