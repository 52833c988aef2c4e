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
// Goal-driven decision-threshold selection on holdout scores, for single
// threshold attacks and for the joint three-threshold rule.

#ifndef PRIVAUDIT_THRESHOLDS_H_
#define PRIVAUDIT_THRESHOLDS_H_

#include <optional>
#include <vector>

#include "privaudit/metrics.h"
#include "privaudit/scores.h"

namespace privaudit {

enum class GoalKind { kMinFpr, kFixedFpr, kMaxPpv, kMaxAdv, kFixedPhi };

// What the adversary optimizes when picking the decision threshold:
// the smallest achievable positive FPR, best TPR at a fixed maximum FPR,
// maximum PPV, maximum advantage, or a caller-supplied threshold.
struct ThresholdGoal {
  GoalKind kind = GoalKind::kMaxPpv;
  double alpha = 0.0;  // kFixedFpr only, in (0, 1]
  double phi = 0.0;    // kFixedPhi only

  static ThresholdGoal MinFpr() { return {GoalKind::kMinFpr}; }
  static ThresholdGoal FixedFpr(double alpha) {
    return {GoalKind::kFixedFpr, alpha};
  }
  static ThresholdGoal MaxPpv() { return {GoalKind::kMaxPpv}; }
  static ThresholdGoal MaxAdv() { return {GoalKind::kMaxAdv}; }
  static ThresholdGoal FixedPhi(double phi) {
    return {GoalKind::kFixedPhi, 0.0, phi};
  }
};

struct SelectedThreshold {
  double phi = 0.0;
  double achieved_alpha = 0.0;  // holdout FPR
  double achieved_tpr = 0.0;
  double achieved_adv = 0.0;
  std::optional<double> achieved_ppv;  // absent when nothing was predicted
};

// Per-entry member predictions under threshold phi, honoring orientation:
// low-means-member predicts score <= phi, high-means-member score >= phi.
std::vector<bool> ThresholdDecisions(const AttackScores& scores, double phi);

// Confusion counts of the thresholded decisions against ground truth.
ConfusionCounts ApplyThreshold(const AttackScores& target, double phi);

// Picks the decision threshold on holdout scores for the given goal.
// Candidate thresholds sit at midpoints between adjacent distinct scores,
// with +-inf sentinels. The holdout pool is expected to carry the gamma:1
// non-member:member composition, so selection PPV uses raw counts.
// Requires at least one member and one non-member; throws
// UnreachableFprError when a fixed FPR has no usable threshold.
SelectedThreshold SelectThreshold(const AttackScores& holdout,
                                  const ThresholdGoal& goal, double gamma);

// The joint rule's three thresholds: a lower and an upper bound on the
// per-instance loss and a minimum on the perturbation ratio.
struct MorganThresholds {
  double loss_lower = 0.0;  // phi_L
  double loss_upper = 0.0;  // phi_U
  double ratio_min = 0.0;   // phi_M
};

// Member iff loss_lower <= loss <= loss_upper and ratio >= ratio_min, all
// comparisons inclusive.
bool MorganDecide(double loss, double merlin_ratio,
                  const MorganThresholds& thresholds);

struct MorganSelection {
  MorganThresholds thresholds;
  double holdout_ppv = 0.0;
  int64_t holdout_true_positives = 0;
  ConfusionCounts holdout_counts;
};

// Selects the three thresholds together to maximize PPV on the holdout set.
// Candidate (loss_upper, ratio_min) pairs come from FixedFpr selections over
// alpha_grid x alpha_grid; infeasible grid cells are skipped. The candidate
// set additionally always contains the single-attack max-PPV thresholds and
// the disabled-gate sentinels, so the returned PPV is never below the best
// single-threshold rule on either score set. loss_lower is scanned over the
// sorted unique holdout losses; ties are broken by more true positives, then
// by the lowest loss_lower. Both score sets must cover identical record ids.
MorganSelection SelectMorgan(const AttackScores& holdout_loss,
                             const AttackScores& holdout_ratio, double gamma,
                             const std::vector<double>& alpha_grid);

// Joint-rule decisions/counts on the target scores (entries matched by id).
std::vector<bool> MorganDecisions(const AttackScores& target_loss,
                                  const AttackScores& target_ratio,
                                  const MorganThresholds& thresholds);
ConfusionCounts ApplyMorgan(const AttackScores& target_loss,
                            const AttackScores& target_ratio,
                            const MorganThresholds& thresholds);

}  // namespace privaudit

#endif  // PRIVAUDIT_THRESHOLDS_H_
