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

#ifndef MNEMOS_CLUSTERING_H_
#define MNEMOS_CLUSTERING_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace mnemos {

struct GmmOptions {
  int restarts = 10;
  int max_iterations = 300;
  double tolerance = 1e-8;  // relative log-likelihood change
  double ridge = 1e-6;      // added to every covariance diagonal
};

struct GmmFit {
  int k = 0;
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;  // k x D
  std::vector<Eigen::MatrixXd> covariances;
  Eigen::MatrixXd responsibilities;  // N x k
  double log_likelihood = 0.0;
  double bic = 0.0;
  int iterations = 0;
  std::vector<double> log_likelihood_history;  // best restart, per EM pass
};

// Free parameters of a full-covariance mixture: mixing weights, means and
// symmetric covariances.
std::int64_t GmmParameterCount(int k, int dims);

// BIC = parameters * ln N - 2 ln L (lower is better).
double Bic(double log_likelihood, int k, int dims, std::size_t n);

// Best of `restarts` k-means++-seeded EM runs by log-likelihood. Throws a
// validation error naming the component if a covariance is not positive
// definite even after the ridge.
GmmFit FitGmm(const Eigen::MatrixXd& rows, int k, std::uint64_t seed,
              const GmmOptions& options = {});

struct GmmSelection {
  int chosen_k = 0;
  std::vector<double> bic_by_k;  // index k-1
  GmmFit fit;                    // the chosen model
  std::vector<int> assignments;  // argmax responsibility, lowest on ties
};

// Fits k = 1..k_max and keeps the model with the lowest BIC (smaller k on
// ties).
GmmSelection FitGmmBic(const Eigen::MatrixXd& rows, int k_max, std::uint64_t seed,
                       const GmmOptions& options = {});

std::vector<int> HardAssignments(const Eigen::MatrixXd& responsibilities);

// Member of `cluster` closest to its centroid; lowest row index on ties.
std::size_t Representative(const Eigen::MatrixXd& rows,
                           const std::vector<int>& assignments,
                           const Eigen::MatrixXd& centroids, int cluster);

// Projection of the centred rows onto the leading principal axes.
Eigen::MatrixXd PcaProject(const Eigen::MatrixXd& rows, int components = 2);

}  // namespace mnemos

#endif  // MNEMOS_CLUSTERING_H_
