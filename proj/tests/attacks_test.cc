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

#include "privaudit/attacks.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gtest/gtest.h"
#include "privaudit/errors.h"
#include "privaudit/rng.h"

namespace privaudit {
namespace {

MlpModel ZeroModel(int d, int h, int c) {
  MlpModel model;
  model.w1 = Eigen::MatrixXd::Zero(d, h);
  model.w2 = Eigen::MatrixXd::Zero(h, h);
  model.w3 = Eigen::MatrixXd::Zero(h, c);
  model.b1 = Eigen::VectorXd::Zero(h);
  model.b2 = Eigen::VectorXd::Zero(h);
  model.b3 = Eigen::VectorXd::Zero(c);
  return model;
}

SplitDataset LeakyDataset(uint64_t seed, int n = 120, double gamma = 1.0) {
  SyntheticSpec spec;
  spec.n_features = 16;
  spec.n_classes = 8;
  spec.class_separation = 1.0;
  spec.within_class_noise = 0.35;
  spec.seed = seed;
  return Generate(spec, n, gamma);
}

TrainConfig LeakyConfig(uint64_t seed = 5) {
  TrainConfig cfg;
  cfg.hidden_width = 32;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 30;
  cfg.epochs = 150;
  cfg.l2_penalty = 1e-8;
  cfg.seed = seed;
  return cfg;
}

double MeanScore(const AttackScores& scores, bool members) {
  double sum = 0.0;
  int count = 0;
  for (const ScoreEntry& e : scores.entries) {
    if (e.is_member == members) {
      sum += e.score;
      ++count;
    }
  }
  return sum / count;
}

TEST(YeomScoresTest, ScoresAreExactlyPerInstanceLosses) {
  const MlpModel model = InitModel(16, 8, 8, 3);
  const SplitDataset ds = LeakyDataset(1, 20);
  const std::vector<Candidate> pool = EvaluationPool(ds);
  const AttackScores scores = YeomScores(model, pool);
  EXPECT_EQ(scores.orientation, ScoreOrientation::kLowMeansMember);
  ASSERT_EQ(scores.entries.size(), pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    EXPECT_DOUBLE_EQ(scores.entries[i].score, Loss(model, pool[i].record));
    EXPECT_EQ(scores.entries[i].record_id, RecordId(pool[i].record));
    EXPECT_EQ(scores.entries[i].is_member, pool[i].is_member);
  }
}

TEST(YeomScoresTest, ThresholdSemanticsOnTwoRecords) {
  MlpModel model = ZeroModel(2, 4, 4);
  model.b3[0] = 9.0;  // confident class-0 prediction everywhere
  std::vector<Candidate> pool;
  pool.push_back({LabeledVector{{0.1f, 0.0f}, 0}, true});   // loss ~ 0
  pool.push_back({LabeledVector{{0.2f, 0.0f}, 1}, false});  // loss ~ 9
  const AttackScores scores = YeomScores(model, pool);
  EXPECT_LT(scores.entries[0].score, 1e-3);
  EXPECT_GT(scores.entries[1].score, 1.0);
  const ConfusionCounts counts = ApplyThreshold(scores, 1e-3);
  EXPECT_EQ(counts.tp, 1);
  EXPECT_EQ(counts.fp, 0);
  EXPECT_EQ(counts.tn, 1);
}

TEST(YeomScoresTest, MembersHaveLowerLossOnAnOverfitModel) {
  const SplitDataset ds = LeakyDataset(7);
  const TrainedArtifact target = Train(ds, LeakyConfig());
  EXPECT_GE(target.train_accuracy, 0.95);
  const AttackScores scores = YeomScores(target.model, EvaluationPool(ds));
  EXPECT_LT(MeanScore(scores, true), MeanScore(scores, false));
}

TEST(MerlinRatioTest, ConstantLossSurfaceNeverCountsAnIncrease) {
  // All-zero weights give the same uniform softmax everywhere, and equality
  // is deliberately not counted as an increase.
  const MlpModel model = ZeroModel(4, 6, 3);
  const LabeledVector record{{0.1f, -0.2f, 0.3f, 0.0f}, 1};
  const double ratio = MerlinRatio(model, record, {100, 0.01, 42});
  EXPECT_DOUBLE_EQ(ratio, 0.0);
}

TEST(MerlinRatioTest, SingleTrialIsBinary) {
  const MlpModel model = InitModel(4, 6, 3, 9);
  Rng rng(13);
  for (int i = 0; i < 20; ++i) {
    LabeledVector record;
    for (int j = 0; j < 4; ++j) {
      record.features.push_back(static_cast<float>(rng.Gaussian() * 0.4));
    }
    record.label = static_cast<int>(rng.UniformInt(3));
    const double ratio = MerlinRatio(model, record, {1, 0.01, 7});
    EXPECT_TRUE(ratio == 0.0 || ratio == 1.0);
  }
}

TEST(MerlinRatioTest, RatioStaysInTheUnitInterval) {
  const MlpModel model = InitModel(6, 10, 4, 21);
  Rng rng(3);
  for (int i = 0; i < 30; ++i) {
    LabeledVector record;
    for (int j = 0; j < 6; ++j) {
      record.features.push_back(static_cast<float>(rng.Gaussian() * 0.3));
    }
    record.label = static_cast<int>(rng.UniformInt(4));
    const double ratio = MerlinRatio(model, record, {25, 0.05, 11});
    EXPECT_GE(ratio, 0.0);
    EXPECT_LE(ratio, 1.0);
  }
}

TEST(MerlinRatioTest, StrictLocalMinimumAlwaysIncreases) {
  // Synthetic analytic surface with a strict minimum at the query point:
  // every perturbation must raise the loss, so the ratio is exactly 1.
  Eigen::VectorXd center(3);
  center << 0.2, -0.1, 0.4;
  const auto quadratic = [&center](const Eigen::VectorXd& x) {
    return (x - center).squaredNorm();
  };
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    EXPECT_DOUBLE_EQ(
        MerlinRatioForLoss(quadratic, center, {200, 0.01, 0}, seed), 1.0);
  }
  // And a constant surface never strictly increases.
  const auto constant = [](const Eigen::VectorXd&) { return 2.5; };
  EXPECT_DOUBLE_EQ(MerlinRatioForLoss(constant, center, {200, 0.01, 0}, 4),
                   0.0);
}

TEST(MerlinScoresTest, PermutingCandidatesPermutesScores) {
  const MlpModel model = InitModel(16, 12, 8, 5);
  const SplitDataset ds = LeakyDataset(2, 15);
  std::vector<Candidate> pool = EvaluationPool(ds);
  const MerlinConfig cfg{40, 0.01, 123};
  const AttackScores forward = MerlinScores(model, pool, cfg);

  std::vector<Candidate> reversed(pool.rbegin(), pool.rend());
  const AttackScores backward = MerlinScores(model, reversed, cfg);
  ASSERT_EQ(forward.entries.size(), backward.entries.size());
  const std::size_t n = forward.entries.size();
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_EQ(forward.entries[i].record_id,
              backward.entries[n - 1 - i].record_id);
    EXPECT_DOUBLE_EQ(forward.entries[i].score,
                     backward.entries[n - 1 - i].score);
  }
}

TEST(MerlinScoresTest, MembersScoreHigherOnAnOverfitModel) {
  const SplitDataset ds = LeakyDataset(11);
  const TrainedArtifact target = Train(ds, LeakyConfig(17));
  const AttackScores scores =
      MerlinScores(target.model, EvaluationPool(ds), {50, 0.01, 99});
  EXPECT_GT(MeanScore(scores, true), MeanScore(scores, false));
}

TEST(ShokriInferenceTest, FeatureLayoutSeparatesHitsFromMisses) {
  Eigen::VectorXd confident(3);
  confident << 0.9, 0.05, 0.05;
  const Eigen::VectorXd hit = ShokriInference::InferenceFeatures(confident, 0, 3);
  const Eigen::VectorXd miss =
      ShokriInference::InferenceFeatures(confident, 2, 3);
  ASSERT_EQ(hit.size(), 6);
  EXPECT_DOUBLE_EQ(hit[0], 0.9);
  EXPECT_DOUBLE_EQ(hit[3], 1.0);
  EXPECT_DOUBLE_EQ(hit[5], 0.0);
  EXPECT_DOUBLE_EQ(miss[5], 1.0);
  EXPECT_NE(hit, miss);
  EXPECT_THROW(ShokriInference::InferenceFeatures(confident, 3, 3),
               std::invalid_argument);
}

TEST(ShokriInferenceTest, InsufficientHoldoutIsRejected) {
  const SplitDataset ds = LeakyDataset(3, 2);
  ShadowConfig cfg;
  cfg.n_shadows = 5;
  EXPECT_THROW(ShokriInference::Fit(ds, LeakyConfig(), cfg),
               InsufficientHoldoutError);
}

// End-to-end shadow attack on an overfit model: scores must be informative
// enough that the max-PPV threshold beats the 50% base rate, and the default
// fixed threshold of 0.5 is just a plain confidence cut.
TEST(ShokriInferenceTest, BeatsTheBaseRateOnAnOverfitModel) {
  const SplitDataset ds = LeakyDataset(19, 150);
  const TrainConfig train_cfg = LeakyConfig(23);
  const TrainedArtifact target = Train(ds, train_cfg);
  const TrainedArtifact holdout = Train(HoldoutView(ds), train_cfg);

  ShadowConfig shadow_cfg;
  shadow_cfg.n_shadows = 5;
  shadow_cfg.seed = 31;
  const ShokriInference inference =
      ShokriInference::Fit(ds, train_cfg, shadow_cfg);

  const AttackScores holdout_scores =
      inference.Score(holdout.model, HoldoutPool(ds));
  const AttackScores target_scores =
      inference.Score(target.model, EvaluationPool(ds));
  EXPECT_EQ(target_scores.orientation, ScoreOrientation::kHighMeansMember);
  for (const ScoreEntry& e : target_scores.entries) {
    EXPECT_GE(e.score, 0.0);
    EXPECT_LE(e.score, 1.0);
  }

  const SelectedThreshold sel =
      SelectThreshold(holdout_scores, ThresholdGoal::MaxPpv(), 1.0);
  const ConfusionCounts counts = ApplyThreshold(target_scores, sel.phi);
  EXPECT_GT(EmpiricalPpv(counts), 0.5);

  // Fixed phi = 0.5 is the plain confidence rule.
  const std::vector<bool> decisions = ThresholdDecisions(target_scores, 0.5);
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    EXPECT_EQ(decisions[i], target_scores.entries[i].score >= 0.5);
  }
}

TEST(ShokriScoresTest, ConvenienceWrapperCoversTheEvaluationPool) {
  const SplitDataset ds = LeakyDataset(4, 40);
  TrainConfig cfg = LeakyConfig();
  cfg.epochs = 20;
  const TrainedArtifact target = Train(ds, cfg);
  ShadowConfig shadow_cfg;
  shadow_cfg.n_shadows = 2;
  shadow_cfg.inference_epochs = 10;
  shadow_cfg.seed = 8;
  const AttackScores scores = ShokriScores(ds, target.model, cfg, shadow_cfg);
  EXPECT_EQ(scores.entries.size(), ds.train.size() + ds.target_test.size());
}

AttackScores WithLabels(ScoreOrientation orientation,
                        const std::vector<std::tuple<double, bool, int>>& rows) {
  AttackScores scores;
  scores.orientation = orientation;
  uint64_t id = 1;
  for (const auto& [score, member, label] : rows) {
    scores.entries.push_back(ScoreEntry{id++, label, score, member});
  }
  return scores;
}

TEST(ClassBasedThresholdsTest, SingleClassEqualsGlobalSelection) {
  const AttackScores holdout = WithLabels(
      ScoreOrientation::kLowMeansMember,
      {{0.1, true, 0}, {0.2, true, 0}, {0.3, false, 0}, {0.4, false, 0}});
  const ClassBasedResult result =
      ClassBasedThresholds(holdout, holdout, ThresholdGoal::MaxAdv(), 1.0);
  const SelectedThreshold global =
      SelectThreshold(holdout, ThresholdGoal::MaxAdv(), 1.0);
  ASSERT_EQ(result.per_class.size(), 1u);
  EXPECT_DOUBLE_EQ(result.per_class.at(0).phi, global.phi);
  EXPECT_EQ(result.counts.tp, 2);
  EXPECT_EQ(result.counts.fp, 0);
}

TEST(ClassBasedThresholdsTest, DisjointClassRangesImproveOnTheGlobalRule) {
  // Two classes whose score ranges do not overlap: one global threshold can
  // only cover one class at FPR 0, while per-class thresholds cover both.
  const AttackScores holdout = WithLabels(
      ScoreOrientation::kLowMeansMember,
      {{0.10, true, 0}, {0.20, true, 0}, {0.30, false, 0}, {0.40, false, 0},
       {1.10, true, 1}, {1.20, true, 1}, {1.30, false, 1}, {1.40, false, 1}});
  const ThresholdGoal goal = ThresholdGoal::FixedFpr(0.25);
  const ClassBasedResult result =
      ClassBasedThresholds(holdout, holdout, goal, 1.0);
  const SelectedThreshold global = SelectThreshold(holdout, goal, 1.0);

  EXPECT_NE(result.per_class.at(0).phi, result.per_class.at(1).phi);
  EXPECT_TRUE(result.per_class.at(0).phi != global.phi ||
              result.per_class.at(1).phi != global.phi);
  // Per-class FPR stays within the goal and the combined TPR improves.
  const double global_tpr = global.achieved_tpr;
  const double cbt_tpr = result.counts.Tpr();
  EXPECT_GE(cbt_tpr, global_tpr);
  EXPECT_DOUBLE_EQ(cbt_tpr, 1.0);
  EXPECT_DOUBLE_EQ(result.counts.Fpr(), 0.0);
}

TEST(ClassBasedThresholdsTest, MissingClassFallsBackToGlobal) {
  const AttackScores holdout = WithLabels(
      ScoreOrientation::kLowMeansMember,
      {{0.1, true, 0}, {0.2, true, 0}, {0.3, false, 0}, {0.4, false, 0},
       {0.15, true, 1}});  // class 1 has no non-members on holdout
  const AttackScores target = WithLabels(
      ScoreOrientation::kLowMeansMember,
      {{0.1, true, 0}, {0.35, false, 0}, {0.12, true, 1}, {0.5, false, 2}});
  const ClassBasedResult result =
      ClassBasedThresholds(holdout, target, ThresholdGoal::MaxAdv(), 1.0);
  ASSERT_TRUE(result.global.has_value());
  // Classes 1 (single-sided) and 2 (absent from holdout) reuse the global.
  EXPECT_DOUBLE_EQ(result.per_class.at(1).phi, result.global->phi);
  EXPECT_DOUBLE_EQ(result.per_class.at(2).phi, result.global->phi);
  EXPECT_EQ(result.decisions.size(), target.entries.size());
}

}  // namespace
}  // namespace privaudit
