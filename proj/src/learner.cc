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

#include "privaudit/learner.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "privaudit/errors.h"
#include "privaudit/rng.h"

namespace privaudit {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kReportDelta = 1e-5;

Eigen::VectorXd ToVector(const LabeledVector& record) {
  Eigen::VectorXd x(record.features.size());
  for (int i = 0; i < x.size(); ++i) x[i] = record.features[i];
  return x;
}

Eigen::MatrixXd ToMatrix(const std::vector<LabeledVector>& records) {
  if (records.empty()) return Eigen::MatrixXd(0, 0);
  const auto d = static_cast<Eigen::Index>(records[0].features.size());
  Eigen::MatrixXd x(records.size(), d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      x(i, j) = records[i].features[j];
    }
  }
  return x;
}

void SoftmaxRowsInPlace(Eigen::MatrixXd& logits) {
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double max = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - max).exp();
    logits.row(i) /= logits.row(i).sum();
  }
}

void CheckRecord(const MlpModel& model, const LabeledVector& record) {
  if (static_cast<int>(record.features.size()) != model.input_dim()) {
    throw std::invalid_argument("record dimension does not match the model");
  }
  if (record.label < 0 || record.label >= model.n_classes()) {
    throw std::invalid_argument("record label outside the model's classes");
  }
}

struct ForwardCache {
  Eigen::MatrixXd a1, a2, probs;  // post-ReLU activations and softmax output
};

ForwardCache Forward(const MlpModel& model, const Eigen::MatrixXd& x) {
  ForwardCache cache;
  cache.a1 =
      ((x * model.w1).rowwise() + model.b1.transpose()).cwiseMax(0.0);
  cache.a2 =
      ((cache.a1 * model.w2).rowwise() + model.b2.transpose()).cwiseMax(0.0);
  cache.probs = (cache.a2 * model.w3).rowwise() + model.b3.transpose();
  SoftmaxRowsInPlace(cache.probs);
  return cache;
}

// Backward pieces shared by the batched paths: the pre-activation deltas for
// the summed cross-entropy over the batch.
struct BatchDeltas {
  Eigen::MatrixXd dz1, dz2, dz3;
};

BatchDeltas Deltas(const MlpModel& model, const std::vector<int32_t>& labels,
                   const ForwardCache& cache) {
  BatchDeltas deltas;
  deltas.dz3 = cache.probs;
  for (Eigen::Index i = 0; i < deltas.dz3.rows(); ++i) {
    deltas.dz3(i, labels[i]) -= 1.0;
  }
  deltas.dz2 = (deltas.dz3 * model.w3.transpose()).array() *
               (cache.a2.array() > 0.0).cast<double>();
  deltas.dz1 = (deltas.dz2 * model.w2.transpose()).array() *
               (cache.a1.array() > 0.0).cast<double>();
  return deltas;
}

MlpGradient AssembleGradient(const Eigen::MatrixXd& x,
                             const ForwardCache& cache,
                             const BatchDeltas& deltas) {
  MlpGradient grad;
  grad.w1 = x.transpose() * deltas.dz1;
  grad.b1 = deltas.dz1.colwise().sum();
  grad.w2 = cache.a1.transpose() * deltas.dz2;
  grad.b2 = deltas.dz2.colwise().sum();
  grad.w3 = cache.a2.transpose() * deltas.dz3;
  grad.b3 = deltas.dz3.colwise().sum();
  return grad;
}

// Backprop of the summed cross-entropy over the batch. x has one row per
// example; labels align with rows.
MlpGradient Backward(const MlpModel& model, const Eigen::MatrixXd& x,
                     const std::vector<int32_t>& labels,
                     const ForwardCache& cache) {
  return AssembleGradient(x, cache, Deltas(model, labels, cache));
}

// Per-example gradient norms from row norms: each layer's per-example
// gradient is the outer product activation^T * delta, whose Frobenius norm
// factors, and the bias gradient is the delta row itself.
Eigen::VectorXd GradientNorms(const Eigen::MatrixXd& x,
                              const ForwardCache& cache,
                              const BatchDeltas& deltas) {
  const Eigen::ArrayXd dz1_sq = deltas.dz1.rowwise().squaredNorm().array();
  const Eigen::ArrayXd dz2_sq = deltas.dz2.rowwise().squaredNorm().array();
  const Eigen::ArrayXd dz3_sq = deltas.dz3.rowwise().squaredNorm().array();
  const Eigen::ArrayXd norm_sq =
      x.rowwise().squaredNorm().array() * dz1_sq +
      cache.a1.rowwise().squaredNorm().array() * dz2_sq +
      cache.a2.rowwise().squaredNorm().array() * dz3_sq + dz1_sq + dz2_sq +
      dz3_sq;
  return norm_sq.sqrt().matrix();
}

// Sum of per-example-clipped gradients in one scaled matrix product per
// layer: sum_i s_i * a_i^T d_i = A^T * diag(s) * D.
MlpGradient ClippedGradientSum(const Eigen::MatrixXd& x,
                               const ForwardCache& cache, BatchDeltas& deltas,
                               double clip_norm) {
  const Eigen::VectorXd norms = GradientNorms(x, cache, deltas);
  Eigen::VectorXd scales(norms.size());
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    scales[i] = norms[i] > clip_norm ? clip_norm / norms[i] : 1.0;
  }
  deltas.dz1 = scales.asDiagonal() * deltas.dz1;
  deltas.dz2 = scales.asDiagonal() * deltas.dz2;
  deltas.dz3 = scales.asDiagonal() * deltas.dz3;
  return AssembleGradient(x, cache, deltas);
}

void SetZero(MlpGradient& grad, const MlpModel& model) {
  grad.w1 = Eigen::MatrixXd::Zero(model.w1.rows(), model.w1.cols());
  grad.w2 = Eigen::MatrixXd::Zero(model.w2.rows(), model.w2.cols());
  grad.w3 = Eigen::MatrixXd::Zero(model.w3.rows(), model.w3.cols());
  grad.b1 = Eigen::VectorXd::Zero(model.b1.size());
  grad.b2 = Eigen::VectorXd::Zero(model.b2.size());
  grad.b3 = Eigen::VectorXd::Zero(model.b3.size());
}

template <typename F>
void ForEachBlock(MlpGradient& grad, F f) {
  f(grad.w1);
  f(grad.w2);
  f(grad.w3);
  f(grad.b1);
  f(grad.b2);
  f(grad.b3);
}

struct AdamState {
  MlpGradient m, v;
  int64_t step = 0;
};

template <typename Block>
void AdamUpdateBlock(Block& param, const Block& grad, Block& m, Block& v,
                     double lr, double bc1, double bc2) {
  m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * grad;
  v.array() = kAdamBeta2 * v.array() + (1.0 - kAdamBeta2) * grad.array().square();
  param.array() -=
      lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + kAdamEps);
}

void AdamUpdate(MlpModel& model, const MlpGradient& grad, AdamState& state,
                double lr) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
  AdamUpdateBlock(model.w1, grad.w1, state.m.w1, state.v.w1, lr, bc1, bc2);
  AdamUpdateBlock(model.w2, grad.w2, state.m.w2, state.v.w2, lr, bc1, bc2);
  AdamUpdateBlock(model.w3, grad.w3, state.m.w3, state.v.w3, lr, bc1, bc2);
  AdamUpdateBlock(model.b1, grad.b1, state.m.b1, state.v.b1, lr, bc1, bc2);
  AdamUpdateBlock(model.b2, grad.b2, state.m.b2, state.v.b2, lr, bc1, bc2);
  AdamUpdateBlock(model.b3, grad.b3, state.m.b3, state.v.b3, lr, bc1, bc2);
}

void ValidateConfig(const TrainConfig& cfg, std::size_t train_size) {
  if (cfg.hidden_width < 1) {
    throw std::invalid_argument("TrainConfig: hidden_width must be >= 1");
  }
  if (!(cfg.learning_rate > 0.0)) {
    throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  }
  if (cfg.batch_size < 1 ||
      static_cast<std::size_t>(cfg.batch_size) > train_size) {
    throw std::invalid_argument(
        "TrainConfig: batch_size must be in [1, train size]");
  }
  if (cfg.epochs < 1) {
    throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  }
  if (cfg.l2_penalty < 0.0) {
    throw std::invalid_argument("TrainConfig: l2_penalty must be >= 0");
  }
  if (!(cfg.clip_norm > 0.0)) {
    throw std::invalid_argument("TrainConfig: clip_norm must be > 0");
  }
  if (cfg.dp_mode && !(cfg.noise_multiplier > 0.0)) {
    throw std::invalid_argument(
        "TrainConfig: dp_mode requires a positive noise_multiplier");
  }
}

template <typename T>
void WriteRaw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void ReadRaw(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

void WriteBlockRowMajor(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      WriteRaw(out, m(i, j));
    }
  }
}

void ReadBlockRowMajor(std::istream& in, Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      ReadRaw(in, m(i, j));
    }
  }
}

constexpr uint32_t kModelMagic = 0x504d4c50;  // "PLMP"

}  // namespace

Eigen::VectorXd MlpModel::PredictProba(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd batch = x.transpose();
  return PredictProbaBatch(batch).row(0).transpose();
}

Eigen::MatrixXd MlpModel::PredictProbaBatch(const Eigen::MatrixXd& x) const {
  if (x.cols() != w1.rows()) {
    throw std::invalid_argument("batch dimension does not match the model");
  }
  return Forward(*this, x).probs;
}

MlpModel InitModel(int input_dim, int hidden_width, int n_classes,
                   uint64_t seed) {
  Rng rng(MixSeed(seed, 0x696e6974 /* "init" */));
  auto glorot = [&rng](Eigen::Index rows, Eigen::Index cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        m(i, j) = limit * (2.0 * rng.Uniform() - 1.0);
      }
    }
    return m;
  };
  MlpModel model;
  model.w1 = glorot(input_dim, hidden_width);
  model.w2 = glorot(hidden_width, hidden_width);
  model.w3 = glorot(hidden_width, n_classes);
  model.b1 = Eigen::VectorXd::Zero(hidden_width);
  model.b2 = Eigen::VectorXd::Zero(hidden_width);
  model.b3 = Eigen::VectorXd::Zero(n_classes);
  return model;
}

double Loss(const MlpModel& model, const LabeledVector& record) {
  CheckRecord(model, record);
  const Eigen::VectorXd probs = model.PredictProba(ToVector(record));
  return -std::log(std::max(probs[record.label], kProbFloor));
}

std::vector<double> BatchLosses(const MlpModel& model,
                                const std::vector<LabeledVector>& records) {
  std::vector<double> losses;
  losses.reserve(records.size());
  if (records.empty()) return losses;
  for (const LabeledVector& r : records) CheckRecord(model, r);
  const Eigen::MatrixXd probs = model.PredictProbaBatch(ToMatrix(records));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    losses.push_back(
        -std::log(std::max(probs(i, records[i].label), kProbFloor)));
  }
  return losses;
}

double MlpGradient::SquaredNorm() const {
  return w1.squaredNorm() + w2.squaredNorm() + w3.squaredNorm() +
         b1.squaredNorm() + b2.squaredNorm() + b3.squaredNorm();
}

MlpGradient LossGradient(const MlpModel& model, const LabeledVector& record) {
  CheckRecord(model, record);
  const Eigen::MatrixXd x = ToVector(record).transpose();
  return Backward(model, x, {record.label}, Forward(model, x));
}

void ClipToNorm(MlpGradient& grad, double clip_norm) {
  const double norm = std::sqrt(grad.SquaredNorm());
  if (norm > clip_norm) {
    const double scale = clip_norm / norm;
    ForEachBlock(grad, [scale](auto& block) { block *= scale; });
  }
}

std::vector<double> PerExampleGradientNorms(
    const MlpModel& model, const std::vector<LabeledVector>& records) {
  std::vector<double> norms;
  if (records.empty()) return norms;
  std::vector<int32_t> labels;
  labels.reserve(records.size());
  for (const LabeledVector& r : records) {
    CheckRecord(model, r);
    labels.push_back(r.label);
  }
  const Eigen::MatrixXd x = ToMatrix(records);
  const ForwardCache cache = Forward(model, x);
  const Eigen::VectorXd result =
      GradientNorms(x, cache, Deltas(model, labels, cache));
  norms.assign(result.data(), result.data() + result.size());
  return norms;
}

double Accuracy(const MlpModel& model,
                const std::vector<LabeledVector>& records) {
  if (records.empty()) return 0.0;
  const Eigen::MatrixXd probs = model.PredictProbaBatch(ToMatrix(records));
  int64_t correct = 0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index argmax = 0;
    probs.row(i).maxCoeff(&argmax);
    if (static_cast<int32_t>(argmax) == records[i].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

TrainedArtifact Train(const SplitDataset& ds, const TrainConfig& cfg) {
  const auto n = ds.train.size();
  ValidateConfig(cfg, n);

  MlpModel model =
      InitModel(ds.n_features, cfg.hidden_width, ds.n_classes, cfg.seed);
  AdamState adam;
  SetZero(adam.m, model);
  SetZero(adam.v, model);

  const Eigen::MatrixXd x_all = ToMatrix(ds.train);
  std::vector<int32_t> y_all(n);
  for (std::size_t i = 0; i < n; ++i) y_all[i] = ds.train[i].label;

  Rng shuffle_rng(MixSeed(cfg.seed, 0x73687566 /* "shuf" */));
  Rng noise_rng(MixSeed(cfg.seed, 0x6e6f6973 /* "nois" */));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  const auto steps_per_epoch =
      (n + cfg.batch_size - 1) / static_cast<std::size_t>(cfg.batch_size);
  const double noise_std =
      cfg.dp_mode ? cfg.noise_multiplier * cfg.clip_norm : 0.0;

  MlpGradient grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with our deterministic stream.
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(order[i],
                order[shuffle_rng.UniformInt(static_cast<int64_t>(i + 1))]);
    }
    for (std::size_t step = 0; step < steps_per_epoch; ++step) {
      const std::size_t begin = step * cfg.batch_size;
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      const auto batch = static_cast<Eigen::Index>(end - begin);

      Eigen::MatrixXd x(batch, ds.n_features);
      std::vector<int32_t> y(batch);
      for (Eigen::Index i = 0; i < batch; ++i) {
        x.row(i) = x_all.row(static_cast<Eigen::Index>(order[begin + i]));
        y[i] = y_all[order[begin + i]];
      }

      if (cfg.dp_mode) {
        const ForwardCache cache = Forward(model, x);
        BatchDeltas deltas = Deltas(model, y, cache);
        if (!deltas.dz3.allFinite()) {
          throw DivergenceError("Train: loss became non-finite");
        }
        grad = ClippedGradientSum(x, cache, deltas, cfg.clip_norm);
        // Noise scaled to the per-example sensitivity, added to the sum
        // before averaging.
        ForEachBlock(grad, [&](auto& block) {
          for (Eigen::Index i = 0; i < block.size(); ++i) {
            block.data()[i] += noise_std * noise_rng.Gaussian();
          }
        });
      } else {
        const ForwardCache cache = Forward(model, x);
        double batch_loss = 0.0;
        for (Eigen::Index i = 0; i < batch; ++i) {
          batch_loss -= std::log(std::max(cache.probs(i, y[i]), kProbFloor));
        }
        if (!std::isfinite(batch_loss)) {
          throw DivergenceError("Train: loss became non-finite");
        }
        grad = Backward(model, x, y, cache);
      }

      const double inv_batch = 1.0 / static_cast<double>(batch);
      ForEachBlock(grad, [inv_batch](auto& block) { block *= inv_batch; });
      if (cfg.l2_penalty > 0.0) {
        grad.w1 += 2.0 * cfg.l2_penalty * model.w1;
        grad.w2 += 2.0 * cfg.l2_penalty * model.w2;
        grad.w3 += 2.0 * cfg.l2_penalty * model.w3;
      }
      AdamUpdate(model, grad, adam, cfg.learning_rate);
    }
    if (!model.w1.allFinite() || !model.w3.allFinite()) {
      throw DivergenceError("Train: parameters became non-finite");
    }
  }

  TrainedArtifact artifact;
  artifact.model = std::move(model);
  artifact.train_accuracy = Accuracy(artifact.model, ds.train);
  artifact.test_accuracy = Accuracy(artifact.model, ds.target_test);
  if (cfg.dp_mode) {
    const SgdPrivacySpec spec{
        cfg.noise_multiplier,
        static_cast<double>(cfg.batch_size) / static_cast<double>(n),
        static_cast<int64_t>(steps_per_epoch) * cfg.epochs};
    const GdpParams gdp = NoisySgdMu(spec);
    artifact.privacy = ModelPrivacy{
        gdp, PrivacyParams{DpEpsilonForDelta(gdp, kReportDelta), kReportDelta}};
  }
  return artifact;
}

double AccuracyLoss(double private_acc, double baseline_acc) {
  if (baseline_acc == 0.0) {
    throw std::invalid_argument("AccuracyLoss: baseline accuracy is zero");
  }
  return 1.0 - private_acc / baseline_acc;
}

void SaveModel(const std::filesystem::path& path, const MlpModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("SaveModel: cannot open " + path.string());
  }
  WriteRaw(out, kModelMagic);
  WriteRaw(out, static_cast<uint32_t>(model.input_dim()));
  WriteRaw(out, static_cast<uint32_t>(model.hidden_width()));
  WriteRaw(out, static_cast<uint32_t>(model.n_classes()));
  WriteBlockRowMajor(out, model.w1);
  WriteBlockRowMajor(out, model.b1);
  WriteBlockRowMajor(out, model.w2);
  WriteBlockRowMajor(out, model.b2);
  WriteBlockRowMajor(out, model.w3);
  WriteBlockRowMajor(out, model.b3);
  if (!out) {
    throw std::runtime_error("SaveModel: write failed for " + path.string());
  }
}

MlpModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("LoadModel: cannot open " + path.string());
  }
  uint32_t magic = 0, d = 0, h = 0, c = 0;
  ReadRaw(in, magic);
  if (magic != kModelMagic) {
    throw std::runtime_error("LoadModel: bad header in " + path.string());
  }
  ReadRaw(in, d);
  ReadRaw(in, h);
  ReadRaw(in, c);
  MlpModel model;
  model.w1.resize(d, h);
  model.b1.resize(h);
  model.w2.resize(h, h);
  model.b2.resize(h);
  model.w3.resize(h, c);
  model.b3.resize(c);
  Eigen::MatrixXd b;
  ReadBlockRowMajor(in, model.w1);
  b.resize(h, 1);
  ReadBlockRowMajor(in, b);
  model.b1 = b.col(0);
  ReadBlockRowMajor(in, model.w2);
  ReadBlockRowMajor(in, b);
  model.b2 = b.col(0);
  ReadBlockRowMajor(in, model.w3);
  b.resize(c, 1);
  ReadBlockRowMajor(in, b);
  model.b3 = b.col(0);
  if (!in) {
    throw std::runtime_error("LoadModel: truncated file " + path.string());
  }
  return model;
}

}  // namespace privaudit
