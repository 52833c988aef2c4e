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
// Command line front-end: privacy-bound curve dumps, synthetic data
// generation, model training, individual attacks, and the full experiment
// sweep with its report generator.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "privaudit/accountant.h"
#include "privaudit/attacks.h"
#include "privaudit/data.h"
#include "privaudit/harness.h"
#include "privaudit/learner.h"

namespace {

using namespace privaudit;

std::vector<double> LogGrid(double lo, double hi, int points) {
  std::vector<double> grid;
  if (points == 1) {
    grid.push_back(lo);
    return grid;
  }
  const double log_lo = std::log10(lo);
  const double log_hi = std::log10(hi);
  for (int i = 0; i < points; ++i) {
    grid.push_back(
        std::pow(10.0, log_lo + (log_hi - log_lo) * i / (points - 1)));
  }
  return grid;
}

int RunBounds(const std::vector<double>& epsilons, double delta,
              double alpha_min, double alpha_max, int alpha_points,
              const std::vector<double>& gammas, const std::string& out_path) {
  std::vector<PrivacyParams> params;
  for (double eps : epsilons) params.push_back({eps, delta});
  const auto rows =
      BoundCurves(params, LogGrid(alpha_min, alpha_max, alpha_points), gammas);
  if (out_path.empty()) {
    WriteBoundCurvesCsv(std::cout, rows);
  } else {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "cannot open " << out_path << "\n";
      return 1;
    }
    WriteBoundCurvesCsv(out, rows);
  }
  return 0;
}

TrainConfig MakeTrainConfig(int hidden, double lr, int batch, int epochs,
                            double l2, double clip, uint64_t seed) {
  TrainConfig cfg;
  cfg.hidden_width = hidden;
  cfg.learning_rate = lr;
  cfg.batch_size = batch;
  cfg.epochs = epochs;
  cfg.l2_penalty = l2;
  cfg.clip_norm = clip;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Membership-inference leakage auditing toolkit"};
  app.require_subcommand(1);

  // ---- bounds ----
  auto* bounds = app.add_subcommand(
      "bounds", "Dump theoretical advantage/PPV bound curves as CSV");
  std::vector<double> epsilons = {1, 5, 10, 50, 100};
  double delta = 1e-5;
  double alpha_min = 1e-4, alpha_max = 1.0;
  int alpha_points = 100;
  std::vector<double> gammas = {1.0};
  std::string out_path;
  bounds->add_option("--epsilons", epsilons, "Privacy budgets")->delimiter(',');
  bounds->add_option("--delta", delta, "Failure probability");
  bounds->add_option("--alpha-min", alpha_min, "Smallest alpha (log grid)");
  bounds->add_option("--alpha-max", alpha_max, "Largest alpha");
  bounds->add_option("--alpha-points", alpha_points, "Grid size");
  bounds->add_option("--gammas", gammas, "Prior ratios")->delimiter(',');
  bounds->add_option("--out", out_path, "Output CSV (default stdout)");

  // ---- gen-data ----
  auto* gen =
      app.add_subcommand("gen-data", "Generate a synthetic split dataset");
  SyntheticSpec spec;
  int n_train = 500;
  double gamma = 1.0;
  std::string data_out, csv_out;
  gen->add_option("--features", spec.n_features, "Feature dimension");
  gen->add_option("--classes", spec.n_classes, "Number of classes");
  gen->add_option("--separation", spec.class_separation, "Centroid radius");
  gen->add_option("--noise", spec.within_class_noise, "Within-class spread");
  gen->add_option("--seed", spec.seed, "Generator seed");
  gen->add_option("--n-train", n_train, "Training set size");
  gen->add_option("--gamma", gamma, "Non-member:member pool ratio");
  gen->add_option("--out", data_out, "Output dataset file")->required();
  gen->add_option("--csv", csv_out, "Optional CSV export");

  // ---- train ----
  auto* train =
      app.add_subcommand("train", "Train the target (or holdout) model");
  std::string train_data, model_out;
  bool use_holdout = false;
  int hidden = 256, batch = 100, epochs = 100;
  double lr = 0.01, l2 = 1e-8, clip = 4.0;
  uint64_t train_seed = 0;
  bool dp_mode = false;
  double dp_epsilon = 0.0, dp_delta = 1e-5, dp_sigma = 0.0;
  train->add_option("--data", train_data, "Dataset file")->required();
  train->add_option("--out", model_out, "Model checkpoint")->required();
  train->add_flag("--holdout", use_holdout, "Train on the holdout split");
  train->add_option("--hidden", hidden, "Hidden width");
  train->add_option("--lr", lr, "Learning rate");
  train->add_option("--batch", batch, "Batch size");
  train->add_option("--epochs", epochs, "Epochs");
  train->add_option("--l2", l2, "L2 penalty");
  train->add_option("--clip", clip, "Per-example clip norm");
  train->add_option("--seed", train_seed, "Training seed");
  train->add_flag("--dp", dp_mode, "Enable DP training");
  train->add_option("--epsilon", dp_epsilon, "Target epsilon (with --dp)");
  train->add_option("--delta", dp_delta, "Target delta (with --dp)");
  train->add_option("--sigma", dp_sigma,
                    "Noise multiplier (overrides --epsilon)");

  // ---- attack ----
  auto* attack =
      app.add_subcommand("attack", "Score candidates with one attack");
  std::string attack_data, attack_model, attack_name = "yeom", scores_out;
  std::string pool_name = "target";
  MerlinConfig merlin_cfg;
  ShadowConfig shadow_cfg;
  uint64_t attack_seed = 0;
  int at_hidden = 256, at_batch = 100, at_epochs = 100;
  double at_lr = 0.01, at_l2 = 1e-8, at_clip = 4.0;
  attack->add_option("--data", attack_data, "Dataset file")->required();
  attack->add_option("--model", attack_model, "Model checkpoint")->required();
  attack->add_option("--attack", attack_name, "yeom | merlin | shokri");
  attack->add_option("--pool", pool_name, "target | holdout");
  attack->add_option("--out", scores_out, "Scores CSV")->required();
  attack->add_option("--seed", attack_seed, "Attack seed");
  attack->add_option("--trials", merlin_cfg.trials, "Perturbation trials");
  attack->add_option("--sigma", merlin_cfg.sigma, "Perturbation std");
  attack->add_option("--shadows", shadow_cfg.n_shadows, "Shadow models");
  attack->add_option("--inference-width", shadow_cfg.inference_hidden_width,
                     "Inference net width");
  attack->add_option("--inference-epochs", shadow_cfg.inference_epochs,
                     "Inference net epochs");
  attack->add_option("--hidden", at_hidden, "Shadow hidden width");
  attack->add_option("--lr", at_lr, "Shadow learning rate");
  attack->add_option("--batch", at_batch, "Shadow batch size");
  attack->add_option("--epochs", at_epochs, "Shadow epochs");
  attack->add_option("--l2", at_l2, "Shadow L2 penalty");
  attack->add_option("--clip", at_clip, "Shadow clip norm");

  // ---- experiment ----
  auto* experiment = app.add_subcommand("experiment", "Run the full sweep");
  std::string exp_config, exp_out;
  uint64_t exp_seed = 0;
  int threads = 0;
  experiment->add_option("--config", exp_config, "Experiment JSON")->required();
  experiment->add_option("--out", exp_out, "Output directory")->required();
  auto* seed_opt =
      experiment->add_option("--seed", exp_seed, "Master seed override");
  experiment->add_option("--threads", threads, "Worker threads (0 = auto)");

  // ---- report ----
  auto* report = app.add_subcommand(
      "report", "Rebuild results.csv/json from stored per-cell decisions");
  std::string report_dir;
  report->add_option("--in", report_dir, "Experiment output directory")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (bounds->parsed()) {
      return RunBounds(epsilons, delta, alpha_min, alpha_max, alpha_points,
                       gammas, out_path);
    }
    if (gen->parsed()) {
      const SplitDataset ds = Generate(spec, n_train, gamma);
      SaveDataset(data_out, ds);
      if (!csv_out.empty()) {
        std::ofstream out(csv_out);
        ExportDatasetCsv(out, ds);
      }
      std::cout << "wrote " << data_out << " (train " << ds.train.size()
                << ", target_test " << ds.target_test.size() << ", gamma "
                << ds.gamma << ")\n";
      return 0;
    }
    if (train->parsed()) {
      SplitDataset ds = LoadDataset(train_data);
      if (use_holdout) ds = HoldoutView(ds);
      TrainConfig cfg =
          MakeTrainConfig(hidden, lr, batch, epochs, l2, clip, train_seed);
      if (dp_mode) {
        cfg.dp_mode = true;
        if (dp_sigma > 0.0) {
          cfg.noise_multiplier = dp_sigma;
        } else {
          const auto steps_per_epoch =
              (ds.train.size() + cfg.batch_size - 1) / cfg.batch_size;
          cfg.noise_multiplier = SigmaForTargetEpsilon(
              {dp_epsilon, dp_delta},
              static_cast<double>(cfg.batch_size) / ds.train.size(),
              static_cast<int64_t>(steps_per_epoch) * cfg.epochs);
        }
      }
      const TrainedArtifact artifact = Train(ds, cfg);
      SaveModel(model_out, artifact.model);
      std::cout << "{\"train_accuracy\":" << artifact.train_accuracy
                << ",\"test_accuracy\":" << artifact.test_accuracy;
      if (artifact.privacy.has_value()) {
        std::cout << ",\"sigma\":" << cfg.noise_multiplier
                  << ",\"mu\":" << artifact.privacy->gdp.mu
                  << ",\"epsilon\":" << artifact.privacy->dp.epsilon
                  << ",\"delta\":" << artifact.privacy->dp.delta;
      }
      std::cout << "}\n";
      return 0;
    }
    if (attack->parsed()) {
      const SplitDataset ds = LoadDataset(attack_data);
      const MlpModel model = LoadModel(attack_model);
      const std::vector<Candidate> pool =
          pool_name == "holdout" ? HoldoutPool(ds) : EvaluationPool(ds);
      AttackScores scores;
      if (attack_name == "yeom") {
        scores = YeomScores(model, pool);
      } else if (attack_name == "merlin") {
        merlin_cfg.seed = attack_seed;
        scores = MerlinScores(model, pool, merlin_cfg);
      } else if (attack_name == "shokri") {
        shadow_cfg.seed = attack_seed;
        const TrainConfig cfg = MakeTrainConfig(at_hidden, at_lr, at_batch,
                                                at_epochs, at_l2, at_clip, 0);
        scores = ShokriInference::Fit(ds, cfg, shadow_cfg).Score(model, pool);
      } else {
        std::cerr << "unknown attack '" << attack_name << "'\n";
        return 1;
      }
      std::ofstream out(scores_out);
      if (!out) {
        std::cerr << "cannot open " << scores_out << "\n";
        return 1;
      }
      WriteScoresCsv(out, scores);
      std::cout << "wrote " << scores_out << " (" << scores.entries.size()
                << " records)\n";
      return 0;
    }
    if (experiment->parsed()) {
      ExperimentConfig cfg = ExperimentConfig::FromJsonFile(exp_config);
      if (seed_opt->count() > 0) cfg.master_seed = exp_seed;
      const ExperimentResult result = RunExperiment(cfg, exp_out, threads);
      std::cout << "wrote " << result.rows.size() << " result rows under "
                << exp_out << "\n";
      return 0;
    }
    if (report->parsed()) {
      const ExperimentResult result = RebuildResults(report_dir);
      std::cout << "rebuilt " << result.rows.size() << " result rows under "
                << report_dir << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
