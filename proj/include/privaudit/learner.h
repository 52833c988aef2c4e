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
// A two-hidden-layer ReLU network with a softmax head, trained from scratch
// with Adam on the cross-entropy loss. The optional DP mode clips every
// per-example gradient and adds Gaussian noise to the batch sum; the
// resulting budget is reported through the accountant.

#ifndef PRIVAUDIT_LEARNER_H_
#define PRIVAUDIT_LEARNER_H_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "privaudit/accountant.h"
#include "privaudit/data.h"

namespace privaudit {

// Weights of the d -> h -> h -> C network. Hidden activations are ReLU and
// the output is a softmax distribution over the C classes.
struct MlpModel {
  Eigen::MatrixXd w1, w2, w3;  // (d x h), (h x h), (h x C)
  Eigen::VectorXd b1, b2, b3;

  int input_dim() const { return static_cast<int>(w1.rows()); }
  int hidden_width() const { return static_cast<int>(w1.cols()); }
  int n_classes() const { return static_cast<int>(w3.cols()); }

  // Class-probability vector for one record; sums to 1 within 1e-6.
  Eigen::VectorXd PredictProba(const Eigen::VectorXd& x) const;
  // Row-per-example batch variant.
  Eigen::MatrixXd PredictProbaBatch(const Eigen::MatrixXd& x) const;
};

// A fresh model with Glorot-uniform weights and zero biases.
MlpModel InitModel(int input_dim, int hidden_width, int n_classes,
                   uint64_t seed);

struct TrainConfig {
  int hidden_width = 256;
  double learning_rate = 0.01;
  int batch_size = 100;
  int epochs = 100;
  double l2_penalty = 1e-8;
  double clip_norm = 4.0;
  bool dp_mode = false;
  double noise_multiplier = 1.0;  // sigma; DP mode only
  uint64_t seed = 0;
};

struct ModelPrivacy {
  GdpParams gdp;
  PrivacyParams dp;  // epsilon at delta = 1e-5
};

struct TrainedArtifact {
  MlpModel model;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::optional<ModelPrivacy> privacy;  // present iff dp_mode was set
};

// Per-instance cross-entropy loss, -log(p_true) with the probability floored
// at 1e-12. Throws std::invalid_argument on a dimension mismatch.
double Loss(const MlpModel& model, const LabeledVector& record);

// Losses for a batch of records (same definition as Loss).
std::vector<double> BatchLosses(const MlpModel& model,
                                const std::vector<LabeledVector>& records);

// Gradient of the per-instance cross-entropy loss, one block per parameter.
struct MlpGradient {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  double SquaredNorm() const;
};
MlpGradient LossGradient(const MlpModel& model, const LabeledVector& record);

// Scales the gradient down to l2 norm clip_norm if it is larger.
void ClipToNorm(MlpGradient& grad, double clip_norm);

// l2 norm of every record's loss gradient, computed in one batched pass
// (per-layer gradients are rank-1, so norms come from activation and delta
// row norms). Matches sqrt(LossGradient(...).SquaredNorm()) per record.
std::vector<double> PerExampleGradientNorms(
    const MlpModel& model, const std::vector<LabeledVector>& records);

// Fraction of records whose argmax prediction matches the label.
double Accuracy(const MlpModel& model,
                const std::vector<LabeledVector>& records);

// Trains on ds.train and evaluates on ds.train / ds.target_test.
// Deterministic given (ds, cfg). Throws DivergenceError if the loss becomes
// non-finite.
TrainedArtifact Train(const SplitDataset& ds, const TrainConfig& cfg);

// 1 - private_acc / baseline_acc. Negative when the private model wins.
double AccuracyLoss(double private_acc, double baseline_acc);

// Checkpoint: dimensions header, then row-major float64 parameter blocks in
// order w1, b1, w2, b2, w3, b3.
void SaveModel(const std::filesystem::path& path, const MlpModel& model);
MlpModel LoadModel(const std::filesystem::path& path);

}  // namespace privaudit

#endif  // PRIVAUDIT_LEARNER_H_
