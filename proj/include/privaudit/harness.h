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
// Experiment orchestration: trains a fresh target and holdout model per run,
// drives every enabled attack under every goal and gamma / privacy setting,
// stores per-cell raw scores and decisions, and aggregates the result table.

#ifndef PRIVAUDIT_HARNESS_H_
#define PRIVAUDIT_HARNESS_H_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "privaudit/attacks.h"
#include "privaudit/data.h"
#include "privaudit/learner.h"
#include "privaudit/metrics.h"
#include "privaudit/thresholds.h"

namespace privaudit {

struct ExperimentAttacks {
  bool yeom = true;
  bool yeom_cbt = false;
  bool shokri = false;
  bool shokri_cbt = false;
  bool merlin = true;
  bool morgan = true;
  MerlinConfig merlin_cfg;
  ShadowConfig shadow_cfg;
  std::vector<double> morgan_alpha_grid = {1e-4, 1e-3, 5e-3, 0.01, 0.02, 0.05};
};

struct ExperimentConfig {
  SyntheticSpec data;  // per-cell seeds are derived from master_seed
  int n_train = 500;
  std::vector<double> gammas = {1.0};
  TrainConfig training;
  bool include_non_private = true;
  std::vector<double> dp_epsilons;  // target budgets at dp_delta
  double dp_delta = 1e-5;
  ExperimentAttacks attacks;
  std::vector<ThresholdGoal> goals = {ThresholdGoal::MaxPpv()};
  int runs = 5;
  uint64_t master_seed = 1;

  static ExperimentConfig FromJsonString(const std::string& text);
  static ExperimentConfig FromJsonFile(const std::filesystem::path& path);
  std::string ToJsonString() const;
};

// Canonical goal naming used in result tables and file names, e.g. "min_fpr",
// "fixed_fpr_0.01", "max_ppv", "max_adv", "fixed_phi".
std::string GoalName(const ThresholdGoal& goal);
ThresholdGoal ParseGoal(const std::string& name);

struct AttackGoalOutcome {
  std::string attack;
  std::string goal;
  bool unreachable = false;            // goal had no usable threshold
  std::optional<double> alpha;         // holdout FPR (requested for fixed)
  std::vector<double> phi_values;      // 1 entry, or 3 for joint/class rules
  std::optional<double> adv;           // target-set advantage
  std::optional<double> ppv;           // target-set PPV
};

struct CellResult {
  int run = 0;
  double gamma = 1.0;
  std::optional<double> epsilon;  // requested budget; absent = non-private
  std::optional<double> sigma;
  std::optional<double> achieved_epsilon;
  std::optional<double> mu;
  double target_train_accuracy = 0.0;
  double target_test_accuracy = 0.0;
  double holdout_train_accuracy = 0.0;
  double holdout_test_accuracy = 0.0;
  double fixed_phi_loss = 0.0;  // holdout model's mean training loss
  std::vector<AttackGoalOutcome> outcomes;
};

struct ResultRow {
  double gamma = 1.0;
  std::optional<double> epsilon;
  std::string attack;
  std::string goal;
  std::optional<double> alpha;     // mean over defined runs
  std::string phi;                 // mean phi, ";"-joined for triples
  MetricAggregate adv;
  MetricAggregate ppv;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<CellResult> cells;
};

// Runs the full experiment and writes the result tree under out_dir:
// config.json, results.csv, results.json, and one cells/<name>/ directory
// per (run, gamma, privacy) cell holding raw scores, per-goal decisions and
// cell.json. Deterministic for a fixed config: two invocations produce
// byte-identical trees. threads = 0 uses the hardware concurrency.
ExperimentResult RunExperiment(const ExperimentConfig& cfg,
                               const std::filesystem::path& out_dir,
                               int threads = 0);

// Recomputes the result table from the stored per-cell decision files and
// rewrites results.csv / results.json in out_dir.
ExperimentResult RebuildResults(const std::filesystem::path& out_dir);

void WriteResultsCsv(std::ostream& out, const std::vector<ResultRow>& rows);
std::string ResultsToJson(const std::vector<ResultRow>& rows);

// Threshold selection on holdout scores followed by application to the
// target scores. Selection never reads the target entries; the audit test
// poisons target membership bits and asserts identical thresholds.
struct SelectApplyOutcome {
  bool unreachable = false;
  std::optional<SelectedThreshold> selection;
  std::optional<ConfusionCounts> counts;
  std::vector<bool> decisions;
};
SelectApplyOutcome SelectAndApply(const AttackScores& holdout,
                                  const AttackScores& target,
                                  const ThresholdGoal& goal, double gamma);

}  // namespace privaudit

#endif  // PRIVAUDIT_HARNESS_H_
