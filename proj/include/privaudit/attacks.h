// Copyright 2026 The Privaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// The membership-inference scorers: per-instance loss, shadow-model
// confidence, perturbation ratio, the joint-threshold rule, and the
// class-based-threshold wrapper.

#ifndef PRIVAUDIT_ATTACKS_H_
#define PRIVAUDIT_ATTACKS_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "privaudit/data.h"
#include "privaudit/learner.h"
#include "privaudit/scores.h"
#include "privaudit/thresholds.h"

namespace privaudit {

// A record paired with its ground-truth membership in the audited model's
// training set.
struct Candidate {
  LabeledVector record;
  bool is_member = false;
};

// The full evaluation pool: every training record (member) plus every
// target_test record (non-member), in split order.
std::vector<Candidate> EvaluationPool(const SplitDataset& ds);
// Same, over the holdout splits (membership is w.r.t. the holdout model).
std::vector<Candidate> HoldoutPool(const SplitDataset& ds);

// Per-instance loss scores; low scores indicate membership.
AttackScores YeomScores(const MlpModel& model,
                        const std::vector<Candidate>& candidates);

struct MerlinConfig {
  int trials = 100;     // T
  double sigma = 0.01;  // perturbation standard deviation
  uint64_t seed = 0;
};

// Fraction of the T Gaussian perturbations that strictly increase the loss
// around the record. The noise stream is derived from (seed, record id), so
// scores do not depend on candidate order. Perturbed records are not
// re-projected onto the unit ball. High ratios indicate membership.
double MerlinRatio(const MlpModel& model, const LabeledVector& record,
                   const MerlinConfig& cfg);

// Core of the ratio computation against an arbitrary loss surface; exposed
// for oracle tests with analytic loss functions.
double MerlinRatioForLoss(
    const std::function<double(const Eigen::VectorXd&)>& loss,
    const Eigen::VectorXd& point, const MerlinConfig& cfg,
    uint64_t stream_seed);

AttackScores MerlinScores(const MlpModel& model,
                          const std::vector<Candidate>& candidates,
                          const MerlinConfig& cfg);

struct ShadowConfig {
  int n_shadows = 5;
  int inference_hidden_width = 64;
  int inference_epochs = 50;
  double inference_learning_rate = 0.01;
  uint64_t seed = 0;
};

// Shadow-model attack: trains n_shadows models on disjoint folds of the
// holdout pool with the target's training configuration, then trains a
// two-hidden-layer inference network on (softmax output, one-hot label)
// features labeled by shadow membership. Scoring feeds a candidate's
// features from the audited model through the inference network; the score
// is the predicted membership confidence in [0, 1].
class ShokriInference {
 public:
  // Throws InsufficientHoldoutError when the holdout pool cannot be split
  // into 2 * n_shadows non-empty folds.
  static ShokriInference Fit(const SplitDataset& ds, const TrainConfig& train_cfg,
                             const ShadowConfig& cfg);

  AttackScores Score(const MlpModel& model,
                     const std::vector<Candidate>& candidates) const;

  // Inference-network input: the model's softmax vector concatenated with a
  // one-hot encoding of the true label.
  static Eigen::VectorXd InferenceFeatures(const Eigen::VectorXd& softmax,
                                           int32_t label, int n_classes);

  const MlpModel& inference_model() const { return net_; }

 private:
  ShokriInference(MlpModel net, int n_classes)
      : net_(std::move(net)), n_classes_(n_classes) {}

  MlpModel net_;
  int n_classes_ = 0;
};

// Fit + Score over the target evaluation pool.
AttackScores ShokriScores(const SplitDataset& ds, const MlpModel& target,
                          const TrainConfig& train_cfg,
                          const ShadowConfig& cfg);

// Class-based thresholds: one threshold per output class, selected
// independently on the class's holdout scores and applied to target records
// of that class. Classes whose holdout slice cannot support selection fall
// back to the global threshold.
struct ClassBasedResult {
  std::optional<SelectedThreshold> global;         // computed when needed
  std::map<int32_t, SelectedThreshold> per_class;  // selected or fallback
  std::vector<bool> decisions;                     // aligned with target
  ConfusionCounts counts;
};
ClassBasedResult ClassBasedThresholds(const AttackScores& holdout,
                                      const AttackScores& target,
                                      const ThresholdGoal& goal, double gamma);

}  // namespace privaudit

#endif  // PRIVAUDIT_ATTACKS_H_
