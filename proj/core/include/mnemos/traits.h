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

#ifndef MNEMOS_TRAITS_H_
#define MNEMOS_TRAITS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "mnemos/corpus.h"

namespace mnemos {

// Binary rule activations z_ij. for observed (learner, kanji) pairs, one
// length-K row of 0/1 bytes per pair, kept in insertion order.
class ActivationTensor {
 public:
  ActivationTensor() = default;
  explicit ActivationTensor(int num_rules) : num_rules_(num_rules) {}

  int num_rules() const { return num_rules_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const std::vector<PairKey>& pairs() const { return pairs_; }

  // Inserts or overwrites the row of `pair`. Indices must lie in [0, K).
  void SetActive(const PairKey& pair, const std::vector<int>& active);
  void SetRow(const PairKey& pair, std::span<const std::uint8_t> bits);

  bool Contains(const PairKey& pair) const;
  std::optional<std::size_t> IndexOf(const PairKey& pair) const;
  std::span<const std::uint8_t> Row(std::size_t pair_index) const;
  std::span<const std::uint8_t> Row(const PairKey& pair) const;
  std::vector<int> ActiveIndices(std::size_t pair_index) const;

  bool operator==(const ActivationTensor& other) const;

 private:
  std::size_t Slot(const PairKey& pair);

  int num_rules_ = 0;
  std::vector<PairKey> pairs_;
  std::unordered_map<PairKey, std::size_t, PairKeyHash> index_;
  std::vector<std::uint8_t> bits_;
};

std::vector<int> ActiveIndices(std::span<const std::uint8_t> bits);

// Latent traits of the additive logistic activation model
//   p(z_ijk = 1) = sigmoid(h_jk + g_ik)
// H is J x K (learner affinities), G is I x K (kanji compatibilities).
class TraitState {
 public:
  TraitState() = default;
  // Throws a validation error on shape mismatch, duplicate ids or
  // non-finite entries.
  TraitState(std::vector<std::string> learner_ids,
             std::vector<std::string> kanji_ids, Eigen::MatrixXd learner_affinity,
             Eigen::MatrixXd kanji_compatibility);

  static TraitState Zeros(std::vector<std::string> learner_ids,
                          std::vector<std::string> kanji_ids, int num_rules);

  int num_rules() const { return static_cast<int>(h_.cols()); }
  const std::vector<std::string>& learner_ids() const { return learner_ids_; }
  const std::vector<std::string>& kanji_ids() const { return kanji_ids_; }
  const Eigen::MatrixXd& learner_affinity() const { return h_; }
  const Eigen::MatrixXd& kanji_compatibility() const { return g_; }

  std::optional<int> LearnerRow(std::string_view learner_id) const;
  std::optional<int> KanjiRow(std::string_view kanji_id) const;

  // Column means over training learners / kanji (the cold-start proxies).
  Eigen::VectorXd MeanLearnerAffinity() const;
  Eigen::VectorXd MeanKanjiCompatibility() const;

  // G row for a seen kanji, the column mean otherwise.
  Eigen::VectorXd KanjiTraitsOrMean(std::string_view kanji_id) const;

  bool operator==(const TraitState& other) const;

 private:
  std::vector<std::string> learner_ids_;
  std::vector<std::string> kanji_ids_;
  Eigen::MatrixXd h_;
  Eigen::MatrixXd g_;
  std::unordered_map<std::string, int> learner_index_;
  std::unordered_map<std::string, int> kanji_index_;
};

double Sigmoid(double x);

// sigmoid(h + g).
double ActivationProbability(double learner_affinity, double kanji_compatibility);

struct FitConfig {
  double step = 0.1;
  int max_iterations = 500;
  double tolerance = 1e-6;  // stop when an accepted step improves less
  double l2 = 1e-4;
  // Accepted steps multiply the step size by `step_growth`; a step that
  // would raise the loss is rejected and the step size halved.
  double step_growth = 1.1;
};

struct FitReport {
  int iterations = 0;
  int rejected_steps = 0;
  bool converged = false;
  double final_step = 0.0;
  std::vector<double> loss_history;  // accepted losses, starting at init
};

// Observed cells of an activation tensor in matrix coordinates.
struct TraitProblem {
  std::vector<std::string> learner_ids;
  std::vector<std::string> kanji_ids;
  int num_rules = 0;
  std::vector<int> learner_row;      // per observation
  std::vector<int> kanji_row;        // per observation
  std::vector<std::uint8_t> labels;  // observations x num_rules, row-major

  // Ids default to the sorted distinct ids present in `z`. Explicit id lists
  // must cover every pair in `z`.
  static TraitProblem From(const ActivationTensor& z);
  static TraitProblem From(const ActivationTensor& z,
                           std::vector<std::string> learner_ids,
                           std::vector<std::string> kanji_ids);
};

// Sum of BCE(sigmoid(h+g), z) over observed cells plus l2 * (|H|^2 + |G|^2).
double TraitLoss(const TraitProblem& problem, const Eigen::MatrixXd& h,
                 const Eigen::MatrixXd& g, double l2);

// Analytic gradient of TraitLoss.
void TraitGradient(const TraitProblem& problem, const Eigen::MatrixXd& h,
                   const Eigen::MatrixXd& g, double l2, Eigen::MatrixXd* grad_h,
                   Eigen::MatrixXd* grad_g);

// Full-batch descent from all-zero traits. The accepted loss sequence is
// non-increasing. Throws a validation error if the loss turns non-finite.
TraitState FitTraits(const TraitProblem& problem, const FitConfig& config = {},
                     FitReport* report = nullptr);
TraitState FitTraits(const ActivationTensor& z, const FitConfig& config = {},
                     FitReport* report = nullptr);

// Rule activation for an unseen learner: mean learner affinity plus the
// kanji's compatibility (column mean for unseen kanji), thresholded on
// probability. When nothing clears the threshold the single most probable
// rule (lowest index on ties) is activated.
std::vector<std::uint8_t> ColdStartActivations(const TraitState& state,
                                               std::string_view kanji_id,
                                               double threshold = 0.5);

enum class ActivationPolicy {
  kColdStart,  // sigmoid(mean h + g) > threshold
  kRandom3,    // three distinct uniformly drawn rules
  kHbarOnly,   // sigmoid(mean h) > 0.5
  kGOnly,      // sigmoid(g) > 0.5
};

std::string_view PolicyName(ActivationPolicy policy);
ActivationPolicy ParsePolicy(std::string_view name);

// Activation vector under `policy`. The random draw depends on `seed` and the
// kanji id only. Throws a validation error for kRandom3 with K < 3.
std::vector<std::uint8_t> PolicyActivations(const TraitState& state,
                                            std::string_view kanji_id,
                                            ActivationPolicy policy,
                                            std::uint64_t seed = 0,
                                            double threshold = 0.5);

}  // namespace mnemos

#endif  // MNEMOS_TRAITS_H_
