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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "privaudit/accountant.h"
#include "privaudit/attacks.h"
#include "privaudit/data.h"
#include "privaudit/errors.h"
#include "privaudit/harness.h"
#include "privaudit/learner.h"
#include "privaudit/metrics.h"
#include "privaudit/thresholds.h"

namespace py = pybind11;

namespace privaudit {
namespace {

PYBIND11_MODULE(_core, m) {
  m.doc() = "Membership-inference leakage auditing toolkit (C++ core)";

  py::register_exception<UnreachableFprError>(m, "UnreachableFprError");
  py::register_exception<UnreachableBudgetError>(m, "UnreachableBudgetError");
  py::register_exception<DivergenceError>(m, "DivergenceError");
  py::register_exception<InsufficientHoldoutError>(m,
                                                   "InsufficientHoldoutError");
  py::register_exception<NoPositivePredictionsError>(
      m, "NoPositivePredictionsError");

  // ---- accountant ----
  py::class_<PrivacyParams>(m, "PrivacyParams")
      .def(py::init<double, double>(), py::arg("epsilon"), py::arg("delta"))
      .def_readwrite("epsilon", &PrivacyParams::epsilon)
      .def_readwrite("delta", &PrivacyParams::delta);
  py::class_<GdpParams>(m, "GdpParams")
      .def(py::init<double>(), py::arg("mu"))
      .def_readwrite("mu", &GdpParams::mu);
  py::class_<SgdPrivacySpec>(m, "SgdPrivacySpec")
      .def(py::init<double, double, int64_t>(), py::arg("noise_multiplier"),
           py::arg("sampling_ratio"), py::arg("steps"))
      .def_readwrite("noise_multiplier", &SgdPrivacySpec::noise_multiplier)
      .def_readwrite("sampling_ratio", &SgdPrivacySpec::sampling_ratio)
      .def_readwrite("steps", &SgdPrivacySpec::steps);

  m.def(
      "eps_delta_tradeoff",
      [](double epsilon, double delta, double alpha) {
        return EpsDeltaTradeoff({epsilon, delta}, alpha);
      },
      py::arg("epsilon"), py::arg("delta"), py::arg("alpha"));
  m.def(
      "gdp_tradeoff",
      [](double mu, double alpha) { return GdpTradeoff({mu}, alpha); },
      py::arg("mu"), py::arg("alpha"));
  m.def(
      "compose_gdp",
      [](const std::vector<double>& mus) { return ComposeGdp(mus).mu; },
      py::arg("mus"));
  m.def(
      "noisy_sgd_mu",
      [](double sigma, double tau, int64_t steps) {
        return NoisySgdMu({sigma, tau, steps}).mu;
      },
      py::arg("noise_multiplier"), py::arg("sampling_ratio"), py::arg("steps"));
  m.def(
      "gdp_to_dp",
      [](double mu, double epsilon) { return GdpToDp({mu}, epsilon); },
      py::arg("mu"), py::arg("epsilon"));
  m.def(
      "dp_epsilon_for_delta",
      [](double mu, double delta) { return DpEpsilonForDelta({mu}, delta); },
      py::arg("mu"), py::arg("delta"));
  m.def(
      "sigma_for_target_epsilon",
      [](double epsilon, double delta, double tau, int64_t steps) {
        return SigmaForTargetEpsilon({epsilon, delta}, tau, steps);
      },
      py::arg("epsilon"), py::arg("delta"), py::arg("sampling_ratio"),
      py::arg("steps"));
  m.def(
      "advantage_bound",
      [](double epsilon, double delta, double alpha) {
        return AdvantageBound({epsilon, delta}, alpha);
      },
      py::arg("epsilon"), py::arg("delta"), py::arg("alpha"));
  m.def(
      "max_advantage_bound",
      [](double epsilon, double delta, int grid_size) {
        return MaxAdvantageBound({epsilon, delta}, grid_size);
      },
      py::arg("epsilon"), py::arg("delta"), py::arg("grid_size") = 10000);
  m.def(
      "ppv_bound",
      [](double epsilon, double delta, double alpha, double gamma) {
        return PpvBound({epsilon, delta}, alpha, gamma);
      },
      py::arg("epsilon"), py::arg("delta"), py::arg("alpha"), py::arg("gamma"));

  py::class_<BoundCurveRow>(m, "BoundCurveRow")
      .def_readonly("epsilon", &BoundCurveRow::epsilon)
      .def_readonly("delta", &BoundCurveRow::delta)
      .def_readonly("alpha", &BoundCurveRow::alpha)
      .def_readonly("gamma", &BoundCurveRow::gamma)
      .def_readonly("adv_bound", &BoundCurveRow::adv_bound)
      .def_readonly("ppv_bound", &BoundCurveRow::ppv_bound);
  m.def(
      "bound_curves",
      [](const std::vector<std::pair<double, double>>& params,
         const std::vector<double>& alphas, const std::vector<double>& gammas) {
        std::vector<PrivacyParams> converted;
        for (const auto& [eps, delta] : params) converted.push_back({eps, delta});
        return BoundCurves(converted, alphas, gammas);
      },
      py::arg("params"), py::arg("alphas"), py::arg("gammas"));

  // ---- data ----
  py::class_<LabeledVector>(m, "LabeledVector")
      .def(py::init([](const std::vector<float>& features, int32_t label) {
             return LabeledVector{features, label};
           }),
           py::arg("features"), py::arg("label"))
      .def_readwrite("features", &LabeledVector::features)
      .def_readwrite("label", &LabeledVector::label)
      .def("record_id", [](const LabeledVector& r) { return RecordId(r); });

  py::class_<SyntheticSpec>(m, "SyntheticSpec")
      .def(py::init<>())
      .def_readwrite("n_features", &SyntheticSpec::n_features)
      .def_readwrite("n_classes", &SyntheticSpec::n_classes)
      .def_readwrite("class_separation", &SyntheticSpec::class_separation)
      .def_readwrite("within_class_noise", &SyntheticSpec::within_class_noise)
      .def_readwrite("seed", &SyntheticSpec::seed);

  py::class_<SplitDataset>(m, "SplitDataset")
      .def_readonly("train", &SplitDataset::train)
      .def_readonly("target_test", &SplitDataset::target_test)
      .def_readonly("holdout_train", &SplitDataset::holdout_train)
      .def_readonly("holdout_test", &SplitDataset::holdout_test)
      .def_readonly("gamma", &SplitDataset::gamma)
      .def_readonly("prior_p", &SplitDataset::prior_p)
      .def_readonly("n_features", &SplitDataset::n_features)
      .def_readonly("n_classes", &SplitDataset::n_classes);

  m.def("generate_dataset", &Generate, py::arg("spec"), py::arg("n_train"),
        py::arg("gamma"));
  m.def("holdout_view", &HoldoutView, py::arg("dataset"));
  m.def("save_dataset", &SaveDataset, py::arg("path"), py::arg("dataset"));
  m.def("load_dataset", &LoadDataset, py::arg("path"));

  // ---- learner ----
  py::class_<MlpModel>(m, "MlpModel")
      .def_readonly("w1", &MlpModel::w1)
      .def_readonly("w2", &MlpModel::w2)
      .def_readonly("w3", &MlpModel::w3)
      .def_property_readonly("input_dim", &MlpModel::input_dim)
      .def_property_readonly("hidden_width", &MlpModel::hidden_width)
      .def_property_readonly("n_classes", &MlpModel::n_classes)
      .def("predict_proba", &MlpModel::PredictProba, py::arg("x"))
      .def("predict_proba_batch", &MlpModel::PredictProbaBatch, py::arg("x"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("hidden_width", &TrainConfig::hidden_width)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("l2_penalty", &TrainConfig::l2_penalty)
      .def_readwrite("clip_norm", &TrainConfig::clip_norm)
      .def_readwrite("dp_mode", &TrainConfig::dp_mode)
      .def_readwrite("noise_multiplier", &TrainConfig::noise_multiplier)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<ModelPrivacy>(m, "ModelPrivacy")
      .def_property_readonly("mu",
                             [](const ModelPrivacy& p) { return p.gdp.mu; })
      .def_property_readonly(
          "epsilon", [](const ModelPrivacy& p) { return p.dp.epsilon; })
      .def_property_readonly("delta",
                             [](const ModelPrivacy& p) { return p.dp.delta; });

  py::class_<TrainedArtifact>(m, "TrainedArtifact")
      .def_readonly("model", &TrainedArtifact::model)
      .def_readonly("train_accuracy", &TrainedArtifact::train_accuracy)
      .def_readonly("test_accuracy", &TrainedArtifact::test_accuracy)
      .def_readonly("privacy", &TrainedArtifact::privacy);

  m.def("train", &Train, py::arg("dataset"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("loss", &Loss, py::arg("model"), py::arg("record"));
  m.def("batch_losses", &BatchLosses, py::arg("model"), py::arg("records"));
  m.def("accuracy", &Accuracy, py::arg("model"), py::arg("records"));
  m.def("accuracy_loss", &AccuracyLoss, py::arg("private_acc"),
        py::arg("baseline_acc"));
  m.def("save_model", &SaveModel, py::arg("path"), py::arg("model"));
  m.def("load_model", &LoadModel, py::arg("path"));

  // ---- scores, attacks ----
  py::enum_<ScoreOrientation>(m, "ScoreOrientation")
      .value("LOW_MEANS_MEMBER", ScoreOrientation::kLowMeansMember)
      .value("HIGH_MEANS_MEMBER", ScoreOrientation::kHighMeansMember);

  py::class_<ScoreEntry>(m, "ScoreEntry")
      .def_readonly("record_id", &ScoreEntry::record_id)
      .def_readonly("label", &ScoreEntry::label)
      .def_readonly("score", &ScoreEntry::score)
      .def_readonly("is_member", &ScoreEntry::is_member);

  py::class_<AttackScores>(m, "AttackScores")
      .def(py::init<>())
      .def_readwrite("orientation", &AttackScores::orientation)
      .def_readwrite("entries", &AttackScores::entries)
      .def("to_csv", [](const AttackScores& scores) {
        std::ostringstream out;
        WriteScoresCsv(out, scores);
        return out.str();
      });

  py::class_<Candidate>(m, "Candidate")
      .def(py::init([](const LabeledVector& record, bool is_member) {
             return Candidate{record, is_member};
           }),
           py::arg("record"), py::arg("is_member"))
      .def_readonly("record", &Candidate::record)
      .def_readonly("is_member", &Candidate::is_member);

  m.def("evaluation_pool", &EvaluationPool, py::arg("dataset"));
  m.def("holdout_pool", &HoldoutPool, py::arg("dataset"));
  m.def("yeom_scores", &YeomScores, py::arg("model"), py::arg("candidates"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<MerlinConfig>(m, "MerlinConfig")
      .def(py::init<>())
      .def_readwrite("trials", &MerlinConfig::trials)
      .def_readwrite("sigma", &MerlinConfig::sigma)
      .def_readwrite("seed", &MerlinConfig::seed);
  m.def("merlin_ratio", &MerlinRatio, py::arg("model"), py::arg("record"),
        py::arg("config"));
  m.def("merlin_scores", &MerlinScores, py::arg("model"), py::arg("candidates"),
        py::arg("config"), py::call_guard<py::gil_scoped_release>());

  py::class_<ShadowConfig>(m, "ShadowConfig")
      .def(py::init<>())
      .def_readwrite("n_shadows", &ShadowConfig::n_shadows)
      .def_readwrite("inference_hidden_width",
                     &ShadowConfig::inference_hidden_width)
      .def_readwrite("inference_epochs", &ShadowConfig::inference_epochs)
      .def_readwrite("inference_learning_rate",
                     &ShadowConfig::inference_learning_rate)
      .def_readwrite("seed", &ShadowConfig::seed);

  py::class_<ShokriInference>(m, "ShokriInference")
      .def_static("fit", &ShokriInference::Fit, py::arg("dataset"),
                  py::arg("train_config"), py::arg("shadow_config"),
                  py::call_guard<py::gil_scoped_release>())
      .def("score", &ShokriInference::Score, py::arg("model"),
           py::arg("candidates"));
  m.def("shokri_scores", &ShokriScores, py::arg("dataset"), py::arg("target"),
        py::arg("train_config"), py::arg("shadow_config"),
        py::call_guard<py::gil_scoped_release>());

  // ---- thresholds ----
  py::class_<ThresholdGoal>(m, "ThresholdGoal")
      .def_static("min_fpr", &ThresholdGoal::MinFpr)
      .def_static("fixed_fpr", &ThresholdGoal::FixedFpr, py::arg("alpha"))
      .def_static("max_ppv", &ThresholdGoal::MaxPpv)
      .def_static("max_adv", &ThresholdGoal::MaxAdv)
      .def_static("fixed_phi", &ThresholdGoal::FixedPhi, py::arg("phi"));

  py::class_<SelectedThreshold>(m, "SelectedThreshold")
      .def_readonly("phi", &SelectedThreshold::phi)
      .def_readonly("achieved_alpha", &SelectedThreshold::achieved_alpha)
      .def_readonly("achieved_tpr", &SelectedThreshold::achieved_tpr)
      .def_readonly("achieved_adv", &SelectedThreshold::achieved_adv)
      .def_readonly("achieved_ppv", &SelectedThreshold::achieved_ppv);

  py::class_<MorganThresholds>(m, "MorganThresholds")
      .def(py::init<double, double, double>(), py::arg("loss_lower"),
           py::arg("loss_upper"), py::arg("ratio_min"))
      .def_readwrite("loss_lower", &MorganThresholds::loss_lower)
      .def_readwrite("loss_upper", &MorganThresholds::loss_upper)
      .def_readwrite("ratio_min", &MorganThresholds::ratio_min);

  py::class_<MorganSelection>(m, "MorganSelection")
      .def_readonly("thresholds", &MorganSelection::thresholds)
      .def_readonly("holdout_ppv", &MorganSelection::holdout_ppv)
      .def_readonly("holdout_true_positives",
                    &MorganSelection::holdout_true_positives);

  m.def("select_threshold", &SelectThreshold, py::arg("holdout"),
        py::arg("goal"), py::arg("gamma"));
  m.def("select_morgan", &SelectMorgan, py::arg("holdout_loss"),
        py::arg("holdout_ratio"), py::arg("gamma"), py::arg("alpha_grid"));
  m.def("apply_threshold", &ApplyThreshold, py::arg("target"), py::arg("phi"));
  m.def("threshold_decisions", &ThresholdDecisions, py::arg("scores"),
        py::arg("phi"));
  m.def("morgan_decide", &MorganDecide, py::arg("loss"),
        py::arg("merlin_ratio"), py::arg("thresholds"));
  m.def("apply_morgan", &ApplyMorgan, py::arg("target_loss"),
        py::arg("target_ratio"), py::arg("thresholds"));

  // ---- metrics ----
  py::class_<ConfusionCounts>(m, "ConfusionCounts")
      .def(py::init([](int64_t tp, int64_t fp, int64_t tn, int64_t fn) {
             return ConfusionCounts{tp, fp, tn, fn};
           }),
           py::arg("tp"), py::arg("fp"), py::arg("tn"), py::arg("fn"))
      .def_readwrite("tp", &ConfusionCounts::tp)
      .def_readwrite("fp", &ConfusionCounts::fp)
      .def_readwrite("tn", &ConfusionCounts::tn)
      .def_readwrite("fn", &ConfusionCounts::fn)
      .def("tpr", &ConfusionCounts::Tpr)
      .def("fpr", &ConfusionCounts::Fpr);

  m.def("advantage", &Advantage, py::arg("counts"));
  m.def("empirical_ppv", &EmpiricalPpv, py::arg("counts"));
  m.def("analytic_ppv", &AnalyticPpv, py::arg("tpr"), py::arg("fpr"),
        py::arg("gamma"));

  py::class_<MetricAggregate>(m, "MetricAggregate")
      .def_readonly("mean", &MetricAggregate::mean)
      .def_readonly("stddev", &MetricAggregate::stddev)
      .def_readonly("excluded_runs", &MetricAggregate::excluded_runs);
  m.def("aggregate", &Aggregate, py::arg("runs"));

  // ---- harness ----
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_static("from_json", &ExperimentConfig::FromJsonString,
                  py::arg("text"))
      .def("to_json", &ExperimentConfig::ToJsonString)
      .def_readwrite("n_train", &ExperimentConfig::n_train)
      .def_readwrite("gammas", &ExperimentConfig::gammas)
      .def_readwrite("runs", &ExperimentConfig::runs)
      .def_readwrite("master_seed", &ExperimentConfig::master_seed);

  py::class_<ResultRow>(m, "ResultRow")
      .def_readonly("gamma", &ResultRow::gamma)
      .def_readonly("epsilon", &ResultRow::epsilon)
      .def_readonly("attack", &ResultRow::attack)
      .def_readonly("goal", &ResultRow::goal)
      .def_readonly("alpha", &ResultRow::alpha)
      .def_readonly("phi", &ResultRow::phi)
      .def_property_readonly(
          "adv_mean", [](const ResultRow& row) { return row.adv.mean; })
      .def_property_readonly(
          "ppv_mean", [](const ResultRow& row) { return row.ppv.mean; });

  py::class_<ExperimentResult>(m, "ExperimentResult")
      .def_readonly("rows", &ExperimentResult::rows);

  m.def("run_experiment", &RunExperiment, py::arg("config"),
        py::arg("out_dir"), py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());
  m.def("rebuild_results", &RebuildResults, py::arg("out_dir"));
}

}  // namespace
}  // namespace privaudit
