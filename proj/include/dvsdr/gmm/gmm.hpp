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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dvsdr/core/matrix.hpp"
#include "dvsdr/core/rng.hpp"

namespace dvsdr::gmm {

/// Mixture of diagonal-covariance Gaussians.
struct GmmModel {
  Vector weights;     // K, on the simplex
  Matrix means;       // K x d
  Matrix variances;   // K x d, each >= the fit's variance floor

  std::size_t components() const noexcept { return weights.size(); }
  std::size_t dim() const noexcept { return means.cols(); }
};

struct EmOptions {
  std::size_t max_iter = 200;
  double tol = 1e-6;  // relative log-likelihood gain
  std::size_t restarts = 3;
  double variance_floor = 1e-6;
};

struct GmmFit {
  GmmModel model;
  /// Log-likelihood at initialization and after every EM iteration of the kept restart.
  std::vector<double> log_likelihood_trace;
};

/// EM with K distinct data points as initial means, uniform weights and the
/// global per-dimension variance. Keeps the restart with the best final
/// likelihood. Throws DomainError when there are fewer rows than components.
GmmFit fit_em(const Matrix& z, std::size_t components, std::uint64_t seed,
              const EmOptions& options = {});

/// sum_i log sum_k w_k N(z_i; mu_k, diag var_k)
double gmm_log_likelihood(const GmmModel& model, const Matrix& z);

/// Posterior component probabilities, one row per point.
Matrix responsibilities(const GmmModel& model, const Matrix& z);

/// n draws mu_k + sqrt(var_k) * eps.
Matrix sample_component(const GmmModel& model, std::size_t k, Rng& rng, std::size_t n);

/// {"K", "dim", "weights", "means", "covs"}; doubles round-trip exactly.
std::string to_json(const GmmModel& model);
GmmModel from_json(const std::string& text);
void save_gmm(const GmmModel& model, const std::filesystem::path& path);
GmmModel load_gmm(const std::filesystem::path& path);

}  // namespace dvsdr::gmm
