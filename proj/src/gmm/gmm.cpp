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

#include "dvsdr/gmm/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>

#include "dvsdr/core/errors.hpp"
#include "dvsdr/core/reduce.hpp"
#include "json.hpp"

namespace dvsdr::gmm {
namespace {

// Smallest weight a component keeps once its responsibilities underflow.
constexpr double kMinWeight = 1e-300;

void require_dim(const GmmModel& model, const Matrix& z) {
  if (z.cols() != model.dim()) {
    throw ShapeError("gmm: points " + z.shape_string() + " but mixture dimension is " +
                     std::to_string(model.dim()));
  }
}

// log w_k + log N(z_i; mu_k, var_k) for every (i, k).
Matrix joint_log_density(const GmmModel& model, const Matrix& z) {
  const std::size_t k_count = model.components();
  const std::size_t d = model.dim();
  Vector offset(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    double log_det = 0.0;
    for (std::size_t j = 0; j < d; ++j) log_det += std::log(2.0 * std::numbers::pi * model.variances(k, j));
    offset[k] = std::log(model.weights[k]) - 0.5 * log_det;
  }
  Matrix out(z.rows(), k_count);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    const auto zi = z.row(i);
    for (std::size_t k = 0; k < k_count; ++k) {
      double quad = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = zi[j] - model.means(k, j);
        quad += diff * diff / model.variances(k, j);
      }
      out(i, k) = offset[k] - 0.5 * quad;
    }
  }
  return out;
}

// E-step: responsibilities (in place of the joint densities) and total log-likelihood.
double expectation(const GmmModel& model, const Matrix& z, Matrix& resp) {
  resp = joint_log_density(model, z);
  double total = 0.0;
  for (std::size_t i = 0; i < resp.rows(); ++i) {
    auto row = resp.row(i);
    const double norm = logsumexp(row);
    total += norm;
    for (double& v : row) v = std::exp(v - norm);
  }
  return total;
}

void maximization(const Matrix& z, const Matrix& resp, double floor, GmmModel& model) {
  const std::size_t n = z.rows();
  const std::size_t d = z.cols();
  for (std::size_t k = 0; k < model.components(); ++k) {
    double nk = 0.0;
    for (std::size_t i = 0; i < n; ++i) nk += resp(i, k);
    model.weights[k] = std::max(nk / static_cast<double>(n), kMinWeight);
    if (!(nk > 0.0)) continue;  // component lost all mass; keep its mean and variance

    for (std::size_t j = 0; j < d; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += resp(i, k) * z(i, j);
      mean /= nk;
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double diff = z(i, j) - mean;
        var += resp(i, k) * diff * diff;
      }
      model.means(k, j) = mean;
      model.variances(k, j) = std::max(var / nk, floor);
    }
  }
  const double total = std::accumulate(model.weights.begin(), model.weights.end(), 0.0);
  for (double& w : model.weights) w /= total;
}

GmmModel initial_model(const Matrix& z, std::size_t components, double floor, Rng& rng) {
  const std::size_t n = z.rows();
  const std::size_t d = z.cols();
  GmmModel m{Vector(components, 1.0 / static_cast<double>(components)), Matrix(components, d),
             Matrix(components, d)};

  // Partial Fisher-Yates: the first `components` slots become a sample without replacement.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t k = 0; k < components; ++k) {
    const auto j = k + static_cast<std::size_t>(rng.uniform_index(n - k));
    std::swap(idx[k], idx[j]);
    const auto src = z.row(idx[k]);
    std::copy(src.begin(), src.end(), m.means.row(k).begin());
  }

  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += z(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (z(i, j) - mean) * (z(i, j) - mean);
    var = std::max(var / static_cast<double>(n), floor);
    for (std::size_t k = 0; k < components; ++k) m.variances(k, j) = var;
  }
  return m;
}

}  // namespace

GmmFit fit_em(const Matrix& z, std::size_t components, std::uint64_t seed,
              const EmOptions& options) {
  if (components == 0) throw DomainError("fit_em: need at least one component");
  if (z.rows() < components) {
    throw DomainError("fit_em: " + std::to_string(z.rows()) + " points for " +
                      std::to_string(components) + " components");
  }
  if (!all_finite(z)) throw DomainError("fit_em: non-finite input");

  GmmFit best;
  bool have_best = false;
  const std::size_t restarts = std::max<std::size_t>(options.restarts, 1);
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng = Rng::derive(seed, r);
    GmmFit fit{initial_model(z, components, options.variance_floor, rng), {}};
    Matrix resp;
    double ll = expectation(fit.model, z, resp);
    fit.log_likelihood_trace.push_back(ll);
    for (std::size_t it = 0; it < options.max_iter; ++it) {
      maximization(z, resp, options.variance_floor, fit.model);
      const double next = expectation(fit.model, z, resp);
      fit.log_likelihood_trace.push_back(next);
      const bool converged = next - ll < options.tol * std::abs(ll);
      ll = next;
      if (converged) break;
    }
    if (!have_best || ll > best.log_likelihood_trace.back()) {
      best = std::move(fit);
      have_best = true;
    }
  }
  return best;
}

double gmm_log_likelihood(const GmmModel& model, const Matrix& z) {
  require_dim(model, z);
  const Matrix joint = joint_log_density(model, z);
  double total = 0.0;
  for (std::size_t i = 0; i < joint.rows(); ++i) total += logsumexp(joint.row(i));
  return total;
}

Matrix responsibilities(const GmmModel& model, const Matrix& z) {
  require_dim(model, z);
  Matrix resp;
  expectation(model, z, resp);
  return resp;
}

Matrix sample_component(const GmmModel& model, std::size_t k, Rng& rng, std::size_t n) {
  if (k >= model.components()) {
    throw DomainError("sample_component: component " + std::to_string(k) + " out of range for " +
                      std::to_string(model.components()) + " components");
  }
  const std::size_t d = model.dim();
  Matrix out(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out(i, j) = model.means(k, j) + std::sqrt(model.variances(k, j)) * rng.normal();
    }
  }
  return out;
}

std::string to_json(const GmmModel& model) {
  using nlohmann::json;
  json means = json::array();
  json covs = json::array();
  for (std::size_t k = 0; k < model.components(); ++k) {
    means.push_back(std::vector<double>(model.means.row(k).begin(), model.means.row(k).end()));
    covs.push_back(
        std::vector<double>(model.variances.row(k).begin(), model.variances.row(k).end()));
  }
  const json j = {{"K", model.components()}, {"dim", model.dim()}, {"weights", model.weights},
                  {"means", means},          {"covs", covs}};
  return j.dump(2) + "\n";
}

GmmModel from_json(const std::string& text) {
  using nlohmann::json;
  try {
    const json j = json::parse(text);
    const auto k = j.at("K").get<std::size_t>();
    const auto d = j.at("dim").get<std::size_t>();
    GmmModel m{j.at("weights").get<Vector>(), Matrix(k, d), Matrix(k, d)};
    const auto means = j.at("means").get<std::vector<Vector>>();
    const auto covs = j.at("covs").get<std::vector<Vector>>();
    if (m.weights.size() != k || means.size() != k || covs.size() != k) {
      throw FormatError("gmm json: expected " + std::to_string(k) + " components");
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (means[c].size() != d || covs[c].size() != d) {
        throw FormatError("gmm json: component " + std::to_string(c) + " is not " +
                          std::to_string(d) + "-dimensional");
      }
      std::copy(means[c].begin(), means[c].end(), m.means.row(c).begin());
      std::copy(covs[c].begin(), covs[c].end(), m.variances.row(c).begin());
      if (!(m.weights[c] > 0.0)) throw FormatError("gmm json: non-positive weight");
      for (double v : covs[c]) {
        if (!(v > 0.0)) throw FormatError("gmm json: non-positive variance");
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("gmm json: ") + e.what());
  }
}

void save_gmm(const GmmModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_json(model);
  if (!out) throw IoError("failed writing " + path.string());
}

GmmModel load_gmm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mixture file " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

}  // namespace dvsdr::gmm
