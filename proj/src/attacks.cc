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
#include <set>
#include <stdexcept>

#include "privaudit/errors.h"
#include "privaudit/rng.h"

namespace privaudit {

namespace {

constexpr double kProbFloor = 1e-12;

Eigen::VectorXd ToVector(const LabeledVector& record) {
  Eigen::VectorXd x(record.features.size());
  for (int i = 0; i < x.size(); ++i) x[i] = record.features[i];
  return x;
}

std::vector<Candidate> Pool(const std::vector<LabeledVector>& members,
                            const std::vector<LabeledVector>& non_members) {
  std::vector<Candidate> pool;
  pool.reserve(members.size() + non_members.size());
  for (const LabeledVector& r : members) pool.push_back({r, true});
  for (const LabeledVector& r : non_members) pool.push_back({r, false});
  return pool;
}

// Ratio of strict loss increases over T perturbation rows evaluated in one
// batch. Row 0 holds the unperturbed record so the reference loss comes from
// the same arithmetic path.
double BatchedMerlinRatio(const MlpModel& model, const LabeledVector& record,
                          const MerlinConfig& cfg, uint64_t stream_seed) {
  Rng rng(stream_seed);
  const Eigen::VectorXd x = ToVector(record);
  Eigen::MatrixXd batch(cfg.trials + 1, x.size());
  batch.row(0) = x.transpose();
  for (int t = 1; t <= cfg.trials; ++t) {
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      batch(t, j) = x[j] + cfg.sigma * rng.Gaussian();
    }
  }
  const Eigen::MatrixXd probs = model.PredictProbaBatch(batch);
  const auto loss_at = [&](Eigen::Index row) {
    return -std::log(std::max(probs(row, record.label), kProbFloor));
  };
  const double base = loss_at(0);
  int count = 0;
  for (int t = 1; t <= cfg.trials; ++t) {
    if (loss_at(t) > base) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(cfg.trials);
}

void ValidateMerlin(const MerlinConfig& cfg) {
  if (cfg.trials < 1) {
    throw std::invalid_argument("MerlinConfig: trials must be >= 1");
  }
  if (!(cfg.sigma > 0.0)) {
    throw std::invalid_argument("MerlinConfig: sigma must be > 0");
  }
}

}  // namespace

std::vector<Candidate> EvaluationPool(const SplitDataset& ds) {
  return Pool(ds.train, ds.target_test);
}

std::vector<Candidate> HoldoutPool(const SplitDataset& ds) {
  return Pool(ds.holdout_train, ds.holdout_test);
}

AttackScores YeomScores(const MlpModel& model,
                        const std::vector<Candidate>& candidates) {
  AttackScores scores;
  scores.orientation = ScoreOrientation::kLowMeansMember;
  std::vector<LabeledVector> records;
  records.reserve(candidates.size());
  for (const Candidate& c : candidates) records.push_back(c.record);
  const std::vector<double> losses = BatchLosses(model, records);
  scores.entries.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scores.entries.push_back(ScoreEntry{RecordId(candidates[i].record),
                                        candidates[i].record.label, losses[i],
                                        candidates[i].is_member});
  }
  return scores;
}

double MerlinRatio(const MlpModel& model, const LabeledVector& record,
                   const MerlinConfig& cfg) {
  ValidateMerlin(cfg);
  return BatchedMerlinRatio(model, record, cfg,
                            MixSeed(cfg.seed, RecordId(record)));
}

double MerlinRatioForLoss(
    const std::function<double(const Eigen::VectorXd&)>& loss,
    const Eigen::VectorXd& point, const MerlinConfig& cfg,
    uint64_t stream_seed) {
  ValidateMerlin(cfg);
  Rng rng(stream_seed);
  const double base = loss(point);
  Eigen::VectorXd perturbed(point.size());
  int count = 0;
  for (int t = 0; t < cfg.trials; ++t) {
    for (Eigen::Index j = 0; j < point.size(); ++j) {
      perturbed[j] = point[j] + cfg.sigma * rng.Gaussian();
    }
    if (loss(perturbed) > base) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(cfg.trials);
}

AttackScores MerlinScores(const MlpModel& model,
                          const std::vector<Candidate>& candidates,
                          const MerlinConfig& cfg) {
  ValidateMerlin(cfg);
  AttackScores scores;
  scores.orientation = ScoreOrientation::kHighMeansMember;
  scores.entries.reserve(candidates.size());
  for (const Candidate& c : candidates) {
    const uint64_t id = RecordId(c.record);
    scores.entries.push_back(
        ScoreEntry{id, c.record.label,
                   BatchedMerlinRatio(model, c.record, cfg, MixSeed(cfg.seed, id)),
                   c.is_member});
  }
  return scores;
}

Eigen::VectorXd ShokriInference::InferenceFeatures(
    const Eigen::VectorXd& softmax, int32_t label, int n_classes) {
  if (label < 0 || label >= n_classes || softmax.size() != n_classes) {
    throw std::invalid_argument("InferenceFeatures: label/softmax mismatch");
  }
  Eigen::VectorXd features = Eigen::VectorXd::Zero(2 * n_classes);
  features.head(n_classes) = softmax;
  features[n_classes + label] = 1.0;
  return features;
}

ShokriInference ShokriInference::Fit(const SplitDataset& ds,
                                     const TrainConfig& train_cfg,
                                     const ShadowConfig& cfg) {
  if (cfg.n_shadows < 1) {
    throw std::invalid_argument("ShadowConfig: n_shadows must be >= 1");
  }
  std::vector<LabeledVector> pool = ds.holdout_train;
  pool.insert(pool.end(), ds.holdout_test.begin(), ds.holdout_test.end());
  const std::size_t n_folds = 2 * static_cast<std::size_t>(cfg.n_shadows);
  if (pool.size() < n_folds) {
    throw InsufficientHoldoutError(
        "ShokriInference: holdout pool smaller than 2 * n_shadows");
  }

  // Equal contiguous folds; the remainder goes to the leading folds.
  const std::size_t base = pool.size() / n_folds;
  const std::size_t remainder = pool.size() % n_folds;
  std::vector<std::vector<LabeledVector>> folds(n_folds);
  std::size_t offset = 0;
  for (std::size_t f = 0; f < n_folds; ++f) {
    const std::size_t len = base + (f < remainder ? 1 : 0);
    folds[f].assign(pool.begin() + offset, pool.begin() + offset + len);
    offset += len;
  }

  // One shadow per (train, test) fold pair, sharing the target's training
  // procedure. The inference set collects (softmax, one-hot label) features
  // labeled by shadow membership.
  std::vector<LabeledVector> inference_set;
  inference_set.reserve(pool.size());
  const int n_classes = ds.n_classes;
  for (int s = 0; s < cfg.n_shadows; ++s) {
    SplitDataset shadow_ds;
    shadow_ds.train = folds[2 * s];
    shadow_ds.target_test = folds[2 * s + 1];
    shadow_ds.gamma = 1.0;
    shadow_ds.prior_p = 0.5;
    shadow_ds.n_features = ds.n_features;
    shadow_ds.n_classes = n_classes;

    TrainConfig shadow_cfg = train_cfg;
    shadow_cfg.batch_size = std::min<int>(
        train_cfg.batch_size, static_cast<int>(shadow_ds.train.size()));
    shadow_cfg.seed = MixSeed(cfg.seed, 0x73686164 /* "shad" */, s);
    const TrainedArtifact shadow = Train(shadow_ds, shadow_cfg);

    for (int side = 0; side < 2; ++side) {
      const auto& records = side == 0 ? shadow_ds.train : shadow_ds.target_test;
      const int32_t member_bit = side == 0 ? 1 : 0;
      for (const LabeledVector& r : records) {
        const Eigen::VectorXd f = InferenceFeatures(
            shadow.model.PredictProba(ToVector(r)), r.label, n_classes);
        LabeledVector example;
        example.label = member_bit;
        example.features.resize(f.size());
        for (Eigen::Index j = 0; j < f.size(); ++j) {
          example.features[j] = static_cast<float>(f[j]);
        }
        inference_set.push_back(std::move(example));
      }
    }
  }

  SplitDataset inference_ds;
  inference_ds.train = std::move(inference_set);
  inference_ds.gamma = 1.0;
  inference_ds.prior_p = 0.5;
  inference_ds.n_features = 2 * n_classes;
  inference_ds.n_classes = 2;

  TrainConfig inference_cfg;
  inference_cfg.hidden_width = cfg.inference_hidden_width;
  inference_cfg.learning_rate = cfg.inference_learning_rate;
  inference_cfg.epochs = cfg.inference_epochs;
  inference_cfg.batch_size =
      std::min<int>(100, static_cast<int>(inference_ds.train.size()));
  inference_cfg.l2_penalty = 1e-8;
  inference_cfg.seed = MixSeed(cfg.seed, 0x696e6665 /* "infe" */);
  TrainedArtifact inference = Train(inference_ds, inference_cfg);

  return ShokriInference(std::move(inference.model), n_classes);
}

AttackScores ShokriInference::Score(
    const MlpModel& model, const std::vector<Candidate>& candidates) const {
  if (model.n_classes() != n_classes_) {
    throw std::invalid_argument("ShokriInference: class-count mismatch");
  }
  AttackScores scores;
  scores.orientation = ScoreOrientation::kHighMeansMember;
  if (candidates.empty()) return scores;

  Eigen::MatrixXd inputs(candidates.size(),
                         static_cast<Eigen::Index>(model.input_dim()));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    inputs.row(i) = ToVector(candidates[i].record).transpose();
  }
  const Eigen::MatrixXd softmax = model.PredictProbaBatch(inputs);

  Eigen::MatrixXd features(candidates.size(), 2 * n_classes_);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    features.row(i) =
        InferenceFeatures(softmax.row(i).transpose(),
                          candidates[i].record.label, n_classes_)
            .transpose();
  }
  const Eigen::MatrixXd confidence = net_.PredictProbaBatch(features);

  scores.entries.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scores.entries.push_back(ScoreEntry{
        RecordId(candidates[i].record), candidates[i].record.label,
        confidence(static_cast<Eigen::Index>(i), 1), candidates[i].is_member});
  }
  return scores;
}

AttackScores ShokriScores(const SplitDataset& ds, const MlpModel& target,
                          const TrainConfig& train_cfg,
                          const ShadowConfig& cfg) {
  const ShokriInference inference = ShokriInference::Fit(ds, train_cfg, cfg);
  return inference.Score(target, EvaluationPool(ds));
}

ClassBasedResult ClassBasedThresholds(const AttackScores& holdout,
                                      const AttackScores& target,
                                      const ThresholdGoal& goal, double gamma) {
  std::set<int32_t> classes;
  for (const ScoreEntry& e : holdout.entries) classes.insert(e.label);
  for (const ScoreEntry& e : target.entries) classes.insert(e.label);

  ClassBasedResult result;
  const auto global = [&]() -> const SelectedThreshold& {
    if (!result.global.has_value()) {
      result.global = SelectThreshold(holdout, goal, gamma);
    }
    return *result.global;
  };

  for (const int32_t cls : classes) {
    AttackScores slice;
    slice.orientation = holdout.orientation;
    for (const ScoreEntry& e : holdout.entries) {
      if (e.label == cls) slice.entries.push_back(e);
    }
    try {
      result.per_class[cls] = SelectThreshold(slice, goal, gamma);
    } catch (const std::exception&) {
      // Not enough class records (or no reachable rate); reuse the global
      // threshold for this class.
      result.per_class[cls] = global();
    }
  }

  result.decisions.reserve(target.entries.size());
  const bool low = target.orientation == ScoreOrientation::kLowMeansMember;
  for (const ScoreEntry& e : target.entries) {
    const double phi = result.per_class.at(e.label).phi;
    const bool predicted = low ? e.score <= phi : e.score >= phi;
    result.decisions.push_back(predicted);
    if (predicted) {
      (e.is_member ? result.counts.tp : result.counts.fp)++;
    } else {
      (e.is_member ? result.counts.fn : result.counts.tn)++;
    }
  }
  return result;
}

}  // namespace privaudit
