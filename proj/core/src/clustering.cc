// Copyright 2026 The Mnemos Authors.
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

#include "mnemos/clustering.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mnemos/errors.h"
#include "mnemos/random.h"

namespace mnemos {

namespace {

void CheckRows(const Eigen::MatrixXd& rows) {
  if (rows.rows() == 0 || rows.cols() == 0) {
    throw ValidationError("clustering needs a non-empty matrix");
  }
  if (!rows.allFinite()) throw ValidationError("clustering input is not finite");
}

// k-means++ seeding: first centre uniform, then proportional to squared
// distance to the nearest chosen centre.
Eigen::MatrixXd SeedMeans(const Eigen::MatrixXd& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd means(k, x.cols());
  means.row(0) = x.row(static_cast<Eigen::Index>(rng.Index(n)));
  Eigen::VectorXd d2 = (x.rowwise() - means.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total <= 0.0) {
      pick = static_cast<Eigen::Index>(rng.Index(n));
    } else {
      double target = rng.Uniform() * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= d2[i];
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
    }
    means.row(c) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - means.row(c)).rowwise().squaredNorm());
  }
  return means;
}

struct EStepOut {
  Eigen::MatrixXd resp;
  double log_likelihood;
};

EStepOut Expectation(const Eigen::MatrixXd& x, const Eigen::VectorXd& weights,
                     const Eigen::MatrixXd& means,
                     const std::vector<Eigen::MatrixXd>& covs) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const int k = static_cast<int>(means.rows());
  Eigen::MatrixXd logp(n, k);
  const double log2pi = std::log(2.0 * std::numbers::pi);
  for (int c = 0; c < k; ++c) {
    Eigen::LLT<Eigen::MatrixXd> llt(covs[c]);
    if (llt.info() != Eigen::Success) {
      throw ValidationError("singular covariance in component " + std::to_string(c));
    }
    const Eigen::MatrixXd& l = llt.matrixL();
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    Eigen::MatrixXd centred = (x.rowwise() - means.row(c)).transpose();  // D x N
    llt.matrixL().solveInPlace(centred);
    const Eigen::VectorXd mahal = centred.colwise().squaredNorm().transpose();
    const double logw = weights[c] > 0.0 ? std::log(weights[c])
                                         : -std::numeric_limits<double>::infinity();
    logp.col(c) = (-0.5 * (mahal.array() + logdet + static_cast<double>(d) * log2pi) +
                   logw)
                      .matrix();
  }
  EStepOut out{Eigen::MatrixXd(n, k), 0.0};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = logp.row(i).maxCoeff();
    const double lse = m + std::log((logp.row(i).array() - m).exp().sum());
    out.resp.row(i) = (logp.row(i).array() - lse).exp().matrix();
    out.log_likelihood += lse;
  }
  return out;
}

GmmFit RunEm(const Eigen::MatrixXd& x, int k, Rng& rng, const GmmOptions& options) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const Eigen::MatrixXd ridge = options.ridge * Eigen::MatrixXd::Identity(d, d);

  GmmFit fit;
  fit.k = k;
  fit.means = SeedMeans(x, k, rng);
  fit.weights = Eigen::VectorXd::Constant(k, 1.0 / k);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centred = x.rowwise() - mean;
  const Eigen::MatrixXd data_cov = centred.transpose() * centred / static_cast<double>(n);
  fit.covariances.assign(k, data_cov + ridge);

  EStepOut e = Expectation(x, fit.weights, fit.means, fit.covariances);
  fit.log_likelihood_history.push_back(e.log_likelihood);
  for (int it = 0; it < options.max_iterations; ++it) {
    const Eigen::VectorXd nk = e.resp.colwise().sum().transpose();
    for (int c = 0; c < k; ++c) {
      fit.weights[c] = nk[c] / static_cast<double>(n);
      if (nk[c] <= 1e-12) continue;  // empty component keeps its shape
      fit.means.row(c) = (e.resp.col(c).transpose() * x) / nk[c];
      const Eigen::MatrixXd dc = x.rowwise() - fit.means.row(c);
      fit.covariances[c] =
          (dc.transpose() * e.resp.col(c).asDiagonal() * dc) / nk[c] + ridge;
    }
    const double previous = e.log_likelihood;
    e = Expectation(x, fit.weights, fit.means, fit.covariances);
    fit.log_likelihood_history.push_back(e.log_likelihood);
    fit.iterations = it + 1;
    if (std::abs(e.log_likelihood - previous) <=
        options.tolerance * std::max(1.0, std::abs(previous))) {
      break;
    }
  }
  fit.responsibilities = std::move(e.resp);
  fit.log_likelihood = e.log_likelihood;
  fit.bic = Bic(fit.log_likelihood, k, static_cast<int>(d), static_cast<std::size_t>(n));
  return fit;
}

}  // namespace

std::int64_t GmmParameterCount(int k, int dims) {
  const std::int64_t kk = k;
  const std::int64_t d = dims;
  return (kk - 1) + kk * d + kk * d * (d + 1) / 2;
}

double Bic(double log_likelihood, int k, int dims, std::size_t n) {
  return static_cast<double>(GmmParameterCount(k, dims)) *
             std::log(static_cast<double>(n)) -
         2.0 * log_likelihood;
}

GmmFit FitGmm(const Eigen::MatrixXd& rows, int k, std::uint64_t seed,
              const GmmOptions& options) {
  CheckRows(rows);
  if (k < 1 || k > rows.rows()) {
    throw ValidationError("GMM needs 1 <= k <= number of rows");
  }
  if (options.restarts < 1) throw ValidationError("GMM needs at least one restart");
  Rng rng(seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(k));
  GmmFit best;
  bool have = false;
  for (int r = 0; r < options.restarts; ++r) {
    GmmFit fit = RunEm(rows, k, rng, options);
    if (!have || fit.log_likelihood > best.log_likelihood) {
      best = std::move(fit);
      have = true;
    }
  }
  return best;
}

std::vector<int> HardAssignments(const Eigen::MatrixXd& responsibilities) {
  std::vector<int> out(responsibilities.rows(), 0);
  for (Eigen::Index i = 0; i < responsibilities.rows(); ++i) {
    int arg = 0;
    for (Eigen::Index c = 1; c < responsibilities.cols(); ++c) {
      if (responsibilities(i, c) > responsibilities(i, arg)) arg = static_cast<int>(c);
    }
    out[i] = arg;
  }
  return out;
}

GmmSelection FitGmmBic(const Eigen::MatrixXd& rows, int k_max, std::uint64_t seed,
                       const GmmOptions& options) {
  CheckRows(rows);
  if (k_max < 1 || k_max > rows.rows()) {
    throw ValidationError("GMM model selection needs 1 <= k_max <= number of rows");
  }
  GmmSelection selection;
  for (int k = 1; k <= k_max; ++k) {
    GmmFit fit = FitGmm(rows, k, seed, options);
    selection.bic_by_k.push_back(fit.bic);
    if (k == 1 || fit.bic < selection.fit.bic) {
      selection.fit = std::move(fit);
      selection.chosen_k = k;
    }
  }
  selection.assignments = HardAssignments(selection.fit.responsibilities);
  return selection;
}

std::size_t Representative(const Eigen::MatrixXd& rows,
                           const std::vector<int>& assignments,
                           const Eigen::MatrixXd& centroids, int cluster) {
  if (assignments.size() != static_cast<std::size_t>(rows.rows())) {
    throw ValidationError("one assignment per row required");
  }
  if (cluster < 0 || cluster >= centroids.rows()) {
    throw ValidationError("cluster id out of range");
  }
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != cluster) continue;
    const double d2 = (rows.row(static_cast<Eigen::Index>(i)) - centroids.row(cluster))
                          .squaredNorm();
    if (!found || d2 < best_d2) {
      best = i;
      best_d2 = d2;
      found = true;
    }
  }
  if (!found) {
    throw ValidationError("cluster " + std::to_string(cluster) + " is empty");
  }
  return best;
}

Eigen::MatrixXd PcaProject(const Eigen::MatrixXd& rows, int components) {
  CheckRows(rows);
  const int dims = static_cast<int>(rows.cols());
  components = std::clamp(components, 1, dims);
  const Eigen::MatrixXd centred = rows.rowwise() - rows.colwise().mean();
  const Eigen::MatrixXd cov =
      centred.transpose() * centred / std::max<double>(1.0, rows.rows() - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  // Eigenvalues come back ascending; take the last columns, largest first,
  // with the sign fixed so the largest-magnitude loading is positive.
  Eigen::MatrixXd axes(dims, components);
  for (int c = 0; c < components; ++c) {
    Eigen::VectorXd v = solver.eigenvectors().col(dims - 1 - c);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    axes.col(c) = v;
  }
  return centred * axes;
}

}  // namespace mnemos
