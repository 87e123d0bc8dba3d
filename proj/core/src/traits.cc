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

#include "mnemos/traits.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "mnemos/errors.h"
#include "mnemos/random.h"
#include "mnemos/text.h"

namespace mnemos {

std::size_t ActivationTensor::Slot(const PairKey& pair) {
  auto [it, inserted] = index_.emplace(pair, pairs_.size());
  if (inserted) {
    pairs_.push_back(pair);
    bits_.resize(bits_.size() + static_cast<std::size_t>(num_rules_), 0);
  }
  return it->second;
}

void ActivationTensor::SetActive(const PairKey& pair,
                                 const std::vector<int>& active) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(num_rules_), 0);
  for (int k : active) {
    if (k < 0 || k >= num_rules_) {
      throw ValidationError("rule index " + std::to_string(k) +
                            " out of range for K=" + std::to_string(num_rules_));
    }
    bits[static_cast<std::size_t>(k)] = 1;
  }
  SetRow(pair, bits);
}

void ActivationTensor::SetRow(const PairKey& pair,
                              std::span<const std::uint8_t> bits) {
  if (bits.size() != static_cast<std::size_t>(num_rules_)) {
    throw ValidationError("activation row has wrong length");
  }
  const std::size_t slot = Slot(pair);
  auto* row = bits_.data() + slot * static_cast<std::size_t>(num_rules_);
  for (std::size_t k = 0; k < bits.size(); ++k) row[k] = bits[k] ? 1 : 0;
}

bool ActivationTensor::Contains(const PairKey& pair) const {
  return index_.count(pair) > 0;
}

std::optional<std::size_t> ActivationTensor::IndexOf(const PairKey& pair) const {
  auto it = index_.find(pair);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const std::uint8_t> ActivationTensor::Row(std::size_t i) const {
  return {bits_.data() + i * static_cast<std::size_t>(num_rules_),
          static_cast<std::size_t>(num_rules_)};
}

std::span<const std::uint8_t> ActivationTensor::Row(const PairKey& pair) const {
  auto i = IndexOf(pair);
  if (!i) {
    throw ValidationError("no activations for (" + pair.learner_id + ", " +
                          pair.kanji_id + ")");
  }
  return Row(*i);
}

std::vector<int> ActivationTensor::ActiveIndices(std::size_t i) const {
  return mnemos::ActiveIndices(Row(i));
}

bool ActivationTensor::operator==(const ActivationTensor& other) const {
  return num_rules_ == other.num_rules_ && pairs_ == other.pairs_ &&
         bits_ == other.bits_;
}

std::vector<int> ActiveIndices(std::span<const std::uint8_t> bits) {
  std::vector<int> active;
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (bits[k]) active.push_back(static_cast<int>(k));
  }
  return active;
}

namespace {

std::unordered_map<std::string, int> IndexIds(
    const std::vector<std::string>& ids, const char* what) {
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!index.emplace(ids[i], static_cast<int>(i)).second) {
      throw ValidationError(std::string("duplicate ") + what + " id '" +
                            ids[i] + "'");
    }
  }
  return index;
}

}  // namespace

TraitState::TraitState(std::vector<std::string> learner_ids,
                       std::vector<std::string> kanji_ids,
                       Eigen::MatrixXd learner_affinity,
                       Eigen::MatrixXd kanji_compatibility)
    : learner_ids_(std::move(learner_ids)),
      kanji_ids_(std::move(kanji_ids)),
      h_(std::move(learner_affinity)),
      g_(std::move(kanji_compatibility)) {
  if (h_.rows() != static_cast<Eigen::Index>(learner_ids_.size()) ||
      g_.rows() != static_cast<Eigen::Index>(kanji_ids_.size()) ||
      h_.cols() != g_.cols()) {
    throw ValidationError("trait matrix shapes do not match id lists");
  }
  if (!h_.allFinite() || !g_.allFinite()) {
    throw ValidationError("trait matrices contain non-finite entries");
  }
  learner_index_ = IndexIds(learner_ids_, "learner");
  kanji_index_ = IndexIds(kanji_ids_, "kanji");
}

TraitState TraitState::Zeros(std::vector<std::string> learner_ids,
                             std::vector<std::string> kanji_ids, int num_rules) {
  const auto j = static_cast<Eigen::Index>(learner_ids.size());
  const auto i = static_cast<Eigen::Index>(kanji_ids.size());
  return TraitState(std::move(learner_ids), std::move(kanji_ids),
                    Eigen::MatrixXd::Zero(j, num_rules),
                    Eigen::MatrixXd::Zero(i, num_rules));
}

std::optional<int> TraitState::LearnerRow(std::string_view id) const {
  auto it = learner_index_.find(std::string(id));
  if (it == learner_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> TraitState::KanjiRow(std::string_view id) const {
  auto it = kanji_index_.find(std::string(id));
  if (it == kanji_index_.end()) return std::nullopt;
  return it->second;
}

Eigen::VectorXd TraitState::MeanLearnerAffinity() const {
  if (h_.rows() == 0) return Eigen::VectorXd::Zero(h_.cols());
  return h_.colwise().mean().transpose();
}

Eigen::VectorXd TraitState::MeanKanjiCompatibility() const {
  if (g_.rows() == 0) return Eigen::VectorXd::Zero(g_.cols());
  return g_.colwise().mean().transpose();
}

Eigen::VectorXd TraitState::KanjiTraitsOrMean(std::string_view kanji_id) const {
  if (auto row = KanjiRow(kanji_id)) return g_.row(*row).transpose();
  return MeanKanjiCompatibility();
}

bool TraitState::operator==(const TraitState& other) const {
  return learner_ids_ == other.learner_ids_ && kanji_ids_ == other.kanji_ids_ &&
         h_.rows() == other.h_.rows() && h_.cols() == other.h_.cols() &&
         g_.rows() == other.g_.rows() && g_.cols() == other.g_.cols() &&
         h_ == other.h_ && g_ == other.g_;
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double ActivationProbability(double learner_affinity,
                             double kanji_compatibility) {
  return Sigmoid(learner_affinity + kanji_compatibility);
}

namespace {

// log(1 + exp(x)) without overflow.
double Softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

std::vector<std::string> SortedUnique(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace

TraitProblem TraitProblem::From(const ActivationTensor& z) {
  std::vector<std::string> learners, kanji;
  for (const auto& pair : z.pairs()) {
    learners.push_back(pair.learner_id);
    kanji.push_back(pair.kanji_id);
  }
  return From(z, SortedUnique(std::move(learners)),
              SortedUnique(std::move(kanji)));
}

TraitProblem TraitProblem::From(const ActivationTensor& z,
                                std::vector<std::string> learner_ids,
                                std::vector<std::string> kanji_ids) {
  TraitProblem problem;
  problem.num_rules = z.num_rules();
  const auto learner_index = IndexIds(learner_ids, "learner");
  const auto kanji_index = IndexIds(kanji_ids, "kanji");
  problem.learner_ids = std::move(learner_ids);
  problem.kanji_ids = std::move(kanji_ids);
  for (std::size_t p = 0; p < z.size(); ++p) {
    const PairKey& pair = z.pairs()[p];
    auto l = learner_index.find(pair.learner_id);
    auto k = kanji_index.find(pair.kanji_id);
    if (l == learner_index.end() || k == kanji_index.end()) {
      throw ValidationError("activation pair (" + pair.learner_id + ", " +
                            pair.kanji_id + ") outside the trait id lists");
    }
    problem.learner_row.push_back(l->second);
    problem.kanji_row.push_back(k->second);
    auto row = z.Row(p);
    problem.labels.insert(problem.labels.end(), row.begin(), row.end());
  }
  return problem;
}

double TraitLoss(const TraitProblem& problem, const Eigen::MatrixXd& h,
                 const Eigen::MatrixXd& g, double l2) {
  const int k_count = problem.num_rules;
  double loss = 0.0;
  for (std::size_t o = 0; o < problem.learner_row.size(); ++o) {
    const int j = problem.learner_row[o];
    const int i = problem.kanji_row[o];
    const std::uint8_t* z = problem.labels.data() + o * k_count;
    for (int k = 0; k < k_count; ++k) {
      const double s = h(j, k) + g(i, k);
      loss += Softplus(s) - (z[k] ? s : 0.0);
    }
  }
  return loss + l2 * (h.squaredNorm() + g.squaredNorm());
}

void TraitGradient(const TraitProblem& problem, const Eigen::MatrixXd& h,
                   const Eigen::MatrixXd& g, double l2, Eigen::MatrixXd* grad_h,
                   Eigen::MatrixXd* grad_g) {
  const int k_count = problem.num_rules;
  *grad_h = 2.0 * l2 * h;
  *grad_g = 2.0 * l2 * g;
  for (std::size_t o = 0; o < problem.learner_row.size(); ++o) {
    const int j = problem.learner_row[o];
    const int i = problem.kanji_row[o];
    const std::uint8_t* z = problem.labels.data() + o * k_count;
    for (int k = 0; k < k_count; ++k) {
      const double residual = Sigmoid(h(j, k) + g(i, k)) - (z[k] ? 1.0 : 0.0);
      (*grad_h)(j, k) += residual;
      (*grad_g)(i, k) += residual;
    }
  }
}

TraitState FitTraits(const TraitProblem& problem, const FitConfig& config,
                     FitReport* report) {
  if (problem.num_rules < 1 || problem.learner_ids.empty() ||
      problem.kanji_ids.empty()) {
    throw ValidationError("trait fit needs I, J, K >= 1");
  }
  const auto j_count = static_cast<Eigen::Index>(problem.learner_ids.size());
  const auto i_count = static_cast<Eigen::Index>(problem.kanji_ids.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(j_count, problem.num_rules);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(i_count, problem.num_rules);
  Eigen::MatrixXd grad_h, grad_g;

  FitReport local;
  double step = config.step;
  double loss = TraitLoss(problem, h, g, config.l2);
  if (!std::isfinite(loss)) throw ValidationError("trait loss is not finite");
  local.loss_history.push_back(loss);

  for (int it = 0; it < config.max_iterations; ++it) {
    local.iterations = it + 1;
    TraitGradient(problem, h, g, config.l2, &grad_h, &grad_g);
    Eigen::MatrixXd h_next = h - step * grad_h;
    Eigen::MatrixXd g_next = g - step * grad_g;
    const double next = TraitLoss(problem, h_next, g_next, config.l2);
    if (!std::isfinite(next)) {
      throw ValidationError("trait loss became non-finite at iteration " +
                            std::to_string(it + 1));
    }
    if (next > loss) {
      ++local.rejected_steps;
      step *= 0.5;
      if (step < 1e-14) break;
      continue;
    }
    const double improvement = loss - next;
    h = std::move(h_next);
    g = std::move(g_next);
    loss = next;
    local.loss_history.push_back(loss);
    step *= config.step_growth;
    if (improvement < config.tolerance) {
      local.converged = true;
      break;
    }
  }
  local.final_step = step;
  if (report != nullptr) *report = std::move(local);
  return TraitState(problem.learner_ids, problem.kanji_ids, std::move(h),
                    std::move(g));
}

TraitState FitTraits(const ActivationTensor& z, const FitConfig& config,
                     FitReport* report) {
  return FitTraits(TraitProblem::From(z), config, report);
}

namespace {

// Bits where prob > threshold; falls back to the argmax (lowest index wins).
std::vector<std::uint8_t> ThresholdWithFallback(const Eigen::VectorXd& logits,
                                                double threshold) {
  const auto k_count = static_cast<std::size_t>(logits.size());
  std::vector<std::uint8_t> bits(k_count, 0);
  bool any = false;
  for (std::size_t k = 0; k < k_count; ++k) {
    if (Sigmoid(logits[static_cast<Eigen::Index>(k)]) > threshold) {
      bits[k] = 1;
      any = true;
    }
  }
  if (!any && k_count > 0) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < logits.size(); ++k) {
      if (logits[k] > logits[best]) best = k;
    }
    bits[static_cast<std::size_t>(best)] = 1;
  }
  return bits;
}

}  // namespace

std::vector<std::uint8_t> ColdStartActivations(const TraitState& state,
                                               std::string_view kanji_id,
                                               double threshold) {
  const Eigen::VectorXd logits =
      state.MeanLearnerAffinity() + state.KanjiTraitsOrMean(kanji_id);
  return ThresholdWithFallback(logits, threshold);
}

std::string_view PolicyName(ActivationPolicy policy) {
  switch (policy) {
    case ActivationPolicy::kColdStart:
      return "cold_start";
    case ActivationPolicy::kRandom3:
      return "random3";
    case ActivationPolicy::kHbarOnly:
      return "hbar_only";
    case ActivationPolicy::kGOnly:
      return "g_only";
  }
  return "unknown";
}

ActivationPolicy ParsePolicy(std::string_view name) {
  for (auto policy : {ActivationPolicy::kColdStart, ActivationPolicy::kRandom3,
                      ActivationPolicy::kHbarOnly, ActivationPolicy::kGOnly}) {
    if (PolicyName(policy) == name) return policy;
  }
  throw ValidationError("unknown activation policy '" + std::string(name) + "'");
}

std::vector<std::uint8_t> PolicyActivations(const TraitState& state,
                                            std::string_view kanji_id,
                                            ActivationPolicy policy,
                                            std::uint64_t seed,
                                            double threshold) {
  switch (policy) {
    case ActivationPolicy::kColdStart:
      return ColdStartActivations(state, kanji_id, threshold);
    case ActivationPolicy::kRandom3: {
      const int k_count = state.num_rules();
      if (k_count < 3) {
        throw ValidationError("random3 policy needs K >= 3, have K=" +
                              std::to_string(k_count));
      }
      Rng rng(seed ^ Fnv1a64(kanji_id));
      std::vector<std::uint8_t> bits(static_cast<std::size_t>(k_count), 0);
      for (int k : rng.Sample(k_count, 3)) bits[static_cast<std::size_t>(k)] = 1;
      return bits;
    }
    case ActivationPolicy::kHbarOnly:
      return ThresholdWithFallback(state.MeanLearnerAffinity(), 0.5);
    case ActivationPolicy::kGOnly:
      return ThresholdWithFallback(state.KanjiTraitsOrMean(kanji_id), 0.5);
  }
  throw ValidationError("unknown activation policy");
}

}  // namespace mnemos
