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

#include "privaudit/thresholds.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "privaudit/errors.h"

namespace privaudit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void CheckScores(const AttackScores& scores) {
  int64_t members = 0, non_members = 0;
  for (const ScoreEntry& e : scores.entries) {
    if (!std::isfinite(e.score)) {
      throw std::invalid_argument("AttackScores: scores must be finite");
    }
    (e.is_member ? members : non_members)++;
  }
  if (members == 0 || non_members == 0) {
    throw std::invalid_argument(
        "AttackScores: need at least one member and one non-member");
  }
}

ConfusionCounts CountsAt(const AttackScores& scores, double phi) {
  ConfusionCounts counts;
  const bool low = scores.orientation == ScoreOrientation::kLowMeansMember;
  for (const ScoreEntry& e : scores.entries) {
    const bool predicted = low ? e.score <= phi : e.score >= phi;
    if (predicted) {
      (e.is_member ? counts.tp : counts.fp)++;
    } else {
      (e.is_member ? counts.fn : counts.tn)++;
    }
  }
  return counts;
}

struct CandidateEval {
  double phi = 0.0;
  ConfusionCounts counts;
  bool midpoint = false;  // false for the +-inf sentinels
  double Fpr() const { return counts.Fpr(); }
  double Tpr() const { return counts.Tpr(); }
  int64_t Predicted() const { return counts.tp + counts.fp; }
};

// All decision-distinct thresholds: midpoints between adjacent distinct
// scores plus the two sentinel endpoints.
std::vector<CandidateEval> EvaluateCandidates(const AttackScores& scores) {
  std::vector<double> values;
  values.reserve(scores.entries.size());
  for (const ScoreEntry& e : scores.entries) values.push_back(e.score);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  std::vector<double> phis;
  phis.push_back(-kInf);
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    phis.push_back(0.5 * (values[i] + values[i + 1]));
  }
  phis.push_back(kInf);

  std::vector<CandidateEval> evals;
  evals.reserve(phis.size());
  for (std::size_t i = 0; i < phis.size(); ++i) {
    CandidateEval eval;
    eval.phi = phis[i];
    eval.midpoint = i != 0 && i + 1 != phis.size();
    eval.counts = CountsAt(scores, phis[i]);
    evals.push_back(eval);
  }
  return evals;
}

SelectedThreshold ToSelected(const CandidateEval& eval) {
  SelectedThreshold sel;
  sel.phi = eval.phi;
  sel.achieved_alpha = eval.Fpr();
  sel.achieved_tpr = eval.Tpr();
  sel.achieved_adv = sel.achieved_tpr - sel.achieved_alpha;
  if (eval.Predicted() > 0) {
    sel.achieved_ppv = EmpiricalPpv(eval.counts);
  }
  return sel;
}

// Lexicographic preference: higher metric, then more predicted members,
// then the numerically smallest phi.
bool Better(double metric, const CandidateEval& eval, double best_metric,
            const CandidateEval& best) {
  if (metric != best_metric) return metric > best_metric;
  if (eval.Predicted() != best.Predicted()) {
    return eval.Predicted() > best.Predicted();
  }
  return eval.phi < best.phi;
}

const CandidateEval* PickBest(const std::vector<const CandidateEval*>& pool,
                              double (*metric)(const CandidateEval&)) {
  const CandidateEval* best = nullptr;
  double best_metric = 0.0;
  for (const CandidateEval* eval : pool) {
    const double m = metric(*eval);
    if (best == nullptr || Better(m, *eval, best_metric, *best)) {
      best = eval;
      best_metric = m;
    }
  }
  return best;
}

}  // namespace

std::vector<bool> ThresholdDecisions(const AttackScores& scores, double phi) {
  std::vector<bool> decisions;
  decisions.reserve(scores.entries.size());
  const bool low = scores.orientation == ScoreOrientation::kLowMeansMember;
  for (const ScoreEntry& e : scores.entries) {
    decisions.push_back(low ? e.score <= phi : e.score >= phi);
  }
  return decisions;
}

ConfusionCounts ApplyThreshold(const AttackScores& target, double phi) {
  return CountsAt(target, phi);
}

SelectedThreshold SelectThreshold(const AttackScores& holdout,
                                  const ThresholdGoal& goal, double /*gamma*/) {
  CheckScores(holdout);

  if (goal.kind == GoalKind::kFixedPhi) {
    CandidateEval eval;
    eval.phi = goal.phi;
    eval.counts = CountsAt(holdout, goal.phi);
    return ToSelected(eval);
  }

  const std::vector<CandidateEval> evals = EvaluateCandidates(holdout);
  std::vector<const CandidateEval*> pool;
  pool.reserve(evals.size());

  switch (goal.kind) {
    case GoalKind::kFixedFpr: {
      if (!(goal.alpha > 0.0 && goal.alpha <= 1.0)) {
        throw std::invalid_argument(
            "ThresholdGoal: fixed FPR alpha must be in (0, 1]");
      }
      bool any_midpoint = false;
      bool feasible_midpoint = false;
      for (const CandidateEval& eval : evals) {
        any_midpoint |= eval.midpoint;
        if (eval.Fpr() <= goal.alpha) {
          feasible_midpoint |= eval.midpoint;
          pool.push_back(&eval);
        }
      }
      // The endpoints alone (predict nobody / everybody) do not make the
      // rate achievable; a real threshold must fit under alpha.
      if (any_midpoint && !feasible_midpoint && goal.alpha < 1.0) {
        throw UnreachableFprError(
            "SelectThreshold: no threshold achieves the requested FPR");
      }
      return ToSelected(
          *PickBest(pool, [](const CandidateEval& e) { return e.Tpr(); }));
    }
    case GoalKind::kMinFpr: {
      // Smallest achievable strictly positive FPR tier, best TPR at it.
      double min_fpr = kInf;
      for (const CandidateEval& eval : evals) {
        const double fpr = eval.Fpr();
        if (fpr > 0.0) min_fpr = std::min(min_fpr, fpr);
      }
      for (const CandidateEval& eval : evals) {
        if (eval.Fpr() == min_fpr) pool.push_back(&eval);
      }
      return ToSelected(
          *PickBest(pool, [](const CandidateEval& e) { return e.Tpr(); }));
    }
    case GoalKind::kMaxPpv: {
      for (const CandidateEval& eval : evals) {
        if (eval.Predicted() > 0) pool.push_back(&eval);
      }
      return ToSelected(*PickBest(
          pool, [](const CandidateEval& e) { return EmpiricalPpv(e.counts); }));
    }
    case GoalKind::kMaxAdv: {
      for (const CandidateEval& eval : evals) pool.push_back(&eval);
      return ToSelected(*PickBest(
          pool, [](const CandidateEval& e) { return e.Tpr() - e.Fpr(); }));
    }
    case GoalKind::kFixedPhi:
      break;  // handled above
  }
  throw std::logic_error("SelectThreshold: unknown goal");
}

bool MorganDecide(double loss, double merlin_ratio,
                  const MorganThresholds& thresholds) {
  if (thresholds.loss_lower > thresholds.loss_upper) {
    throw std::invalid_argument("MorganThresholds: loss_lower > loss_upper");
  }
  return thresholds.loss_lower <= loss && loss <= thresholds.loss_upper &&
         merlin_ratio >= thresholds.ratio_min;
}

namespace {

struct JointRecord {
  double loss = 0.0;
  double ratio = 0.0;
  bool is_member = false;
};

std::vector<JointRecord> JoinScores(const AttackScores& loss_scores,
                                    const AttackScores& ratio_scores) {
  if (loss_scores.orientation != ScoreOrientation::kLowMeansMember ||
      ratio_scores.orientation != ScoreOrientation::kHighMeansMember) {
    throw std::invalid_argument(
        "SelectMorgan: expects loss (low) and ratio (high) score sets");
  }
  if (loss_scores.entries.size() != ratio_scores.entries.size()) {
    throw std::invalid_argument(
        "SelectMorgan: score sets must cover identical records");
  }
  std::unordered_map<uint64_t, const ScoreEntry*> by_id;
  by_id.reserve(ratio_scores.entries.size());
  for (const ScoreEntry& e : ratio_scores.entries) by_id[e.record_id] = &e;
  std::vector<JointRecord> joined;
  joined.reserve(loss_scores.entries.size());
  for (const ScoreEntry& e : loss_scores.entries) {
    const auto it = by_id.find(e.record_id);
    if (it == by_id.end()) {
      throw std::invalid_argument(
          "SelectMorgan: score sets must cover identical records");
    }
    joined.push_back(JointRecord{e.score, it->second->score, e.is_member});
  }
  return joined;
}

// FixedFpr thresholds over the alpha grid plus the max-PPV threshold;
// infeasible alphas are skipped.
std::vector<double> GateCandidates(const AttackScores& scores,
                                   const std::vector<double>& alpha_grid,
                                   double gamma) {
  std::vector<double> phis;
  for (double alpha : alpha_grid) {
    try {
      phis.push_back(
          SelectThreshold(scores, ThresholdGoal::FixedFpr(alpha), gamma).phi);
    } catch (const UnreachableFprError&) {
    }
  }
  phis.push_back(
      SelectThreshold(scores, ThresholdGoal::MaxPpv(), gamma).phi);
  std::sort(phis.begin(), phis.end());
  phis.erase(std::unique(phis.begin(), phis.end()), phis.end());
  return phis;
}

}  // namespace

MorganSelection SelectMorgan(const AttackScores& holdout_loss,
                             const AttackScores& holdout_ratio, double gamma,
                             const std::vector<double>& alpha_grid) {
  CheckScores(holdout_loss);
  CheckScores(holdout_ratio);
  if (alpha_grid.empty()) {
    throw std::invalid_argument("SelectMorgan: alpha grid must be non-empty");
  }
  const std::vector<JointRecord> records =
      JoinScores(holdout_loss, holdout_ratio);

  // Upper-loss gate candidates; the +inf sentinel disables the gate and
  // guarantees the pure ratio rule stays reachable.
  std::vector<double> uppers = GateCandidates(holdout_loss, alpha_grid, gamma);
  if (!uppers.empty() && uppers.front() == -kInf) uppers.erase(uppers.begin());
  if (uppers.empty() || uppers.back() != kInf) uppers.push_back(kInf);

  // Ratio gate candidates; 0 disables the gate (ratios are in [0, 1]).
  std::vector<double> ratio_mins =
      GateCandidates(holdout_ratio, alpha_grid, gamma);
  for (double& phi : ratio_mins) {
    if (phi == -kInf) phi = 0.0;
  }
  while (!ratio_mins.empty() && ratio_mins.back() == kInf) ratio_mins.pop_back();
  ratio_mins.insert(ratio_mins.begin(), 0.0);
  std::sort(ratio_mins.begin(), ratio_mins.end());
  ratio_mins.erase(std::unique(ratio_mins.begin(), ratio_mins.end()),
                   ratio_mins.end());

  // Records in descending loss order; scanning loss_lower downward over the
  // distinct losses accumulates the passing records incrementally.
  std::vector<std::size_t> by_loss_desc(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) by_loss_desc[i] = i;
  std::sort(by_loss_desc.begin(), by_loss_desc.end(),
            [&records](std::size_t a, std::size_t b) {
              return records[a].loss > records[b].loss;
            });

  bool found = false;
  MorganThresholds best;
  double best_ppv = -1.0;
  int64_t best_tp = 0;

  for (const double upper : uppers) {
    for (const double ratio_min : ratio_mins) {
      int64_t tp = 0, fp = 0;
      std::size_t i = 0;
      // Skip losses above the upper gate.
      while (i < by_loss_desc.size() &&
             records[by_loss_desc[i]].loss > upper) {
        ++i;
      }
      while (i < by_loss_desc.size()) {
        const double lower = records[by_loss_desc[i]].loss;
        // Absorb the whole tie group at this loss value.
        while (i < by_loss_desc.size() &&
               records[by_loss_desc[i]].loss == lower) {
          const JointRecord& r = records[by_loss_desc[i]];
          if (r.ratio >= ratio_min) {
            (r.is_member ? tp : fp)++;
          }
          ++i;
        }
        if (tp + fp == 0) continue;
        const double ppv =
            static_cast<double>(tp) / static_cast<double>(tp + fp);
        // Maximize PPV; break ties by more true positives, then the lowest
        // lower-loss gate (scan order already visits lower values last).
        if (!found || ppv > best_ppv || (ppv == best_ppv && tp > best_tp) ||
            (ppv == best_ppv && tp == best_tp && lower < best.loss_lower)) {
          found = true;
          best = MorganThresholds{lower, upper, ratio_min};
          best_ppv = ppv;
          best_tp = tp;
        }
      }
    }
  }
  if (!found) {
    throw UnreachableFprError("SelectMorgan: every candidate cell is empty");
  }

  MorganSelection selection;
  selection.thresholds = best;
  selection.holdout_ppv = best_ppv;
  selection.holdout_true_positives = best_tp;
  for (const JointRecord& r : records) {
    const bool predicted = MorganDecide(r.loss, r.ratio, best);
    if (predicted) {
      (r.is_member ? selection.holdout_counts.tp
                   : selection.holdout_counts.fp)++;
    } else {
      (r.is_member ? selection.holdout_counts.fn
                   : selection.holdout_counts.tn)++;
    }
  }
  return selection;
}

std::vector<bool> MorganDecisions(const AttackScores& target_loss,
                                  const AttackScores& target_ratio,
                                  const MorganThresholds& thresholds) {
  const std::vector<JointRecord> records = JoinScores(target_loss, target_ratio);
  std::vector<bool> decisions;
  decisions.reserve(records.size());
  for (const JointRecord& r : records) {
    decisions.push_back(MorganDecide(r.loss, r.ratio, thresholds));
  }
  return decisions;
}

ConfusionCounts ApplyMorgan(const AttackScores& target_loss,
                            const AttackScores& target_ratio,
                            const MorganThresholds& thresholds) {
  const std::vector<JointRecord> records = JoinScores(target_loss, target_ratio);
  ConfusionCounts counts;
  for (const JointRecord& r : records) {
    if (MorganDecide(r.loss, r.ratio, thresholds)) {
      (r.is_member ? counts.tp : counts.fp)++;
    } else {
      (r.is_member ? counts.fn : counts.tn)++;
    }
  }
  return counts;
}

}  // namespace privaudit
