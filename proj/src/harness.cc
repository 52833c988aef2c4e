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

#include "privaudit/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "privaudit/errors.h"
#include "privaudit/rng.h"

namespace privaudit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string FormatDouble(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

// Round-trip exact formatting for raw per-cell storage.
std::string FormatDoubleExact(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string JoinPhi(const std::vector<double>& values) {
  if (values.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ';';
    out += FormatDouble(values[i]);
  }
  return out;
}

std::string FormatOptional(const std::optional<double>& value) {
  return value.has_value() ? FormatDouble(*value) : "-";
}

json OptionalToJson(const std::optional<double>& value) {
  if (!value.has_value()) return nullptr;
  return *value;
}

std::optional<double> OptionalFromJson(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

struct CellTask {
  int run = 0;
  int gamma_index = 0;
  int eps_index = -1;  // -1 = non-private
  double gamma = 1.0;
  std::optional<double> epsilon;
  double sigma = 0.0;
};

std::string CellDirName(const CellTask& task) {
  char buf[96];
  if (task.epsilon.has_value()) {
    std::snprintf(buf, sizeof(buf), "run%02d_gamma%g_eps%g", task.run,
                  task.gamma, *task.epsilon);
  } else {
    std::snprintf(buf, sizeof(buf), "run%02d_gamma%g_np", task.run, task.gamma);
  }
  return buf;
}

void WriteDecisionsCsv(const fs::path& path, const AttackScores& target,
                       const std::vector<bool>& decisions) {
  std::ofstream out(path);
  out << "record_id,predicted,is_member\n";
  for (std::size_t i = 0; i < target.entries.size(); ++i) {
    out << target.entries[i].record_id << ',' << (decisions[i] ? 1 : 0) << ','
        << (target.entries[i].is_member ? 1 : 0) << "\n";
  }
}

ConfusionCounts ReadDecisionsCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("ReadDecisionsCsv: cannot open " + path.string());
  }
  std::string line;
  std::getline(in, line);  // header
  ConfusionCounts counts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const bool predicted = line[c1 + 1] == '1';
    const bool member = line[c2 + 1] == '1';
    if (predicted) {
      (member ? counts.tp : counts.fp)++;
    } else {
      (member ? counts.fn : counts.tn)++;
    }
  }
  return counts;
}

struct ScoreSets {
  AttackScores holdout;
  AttackScores target;
};

double Median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::optional<double> TryEmpiricalPpv(const ConfusionCounts& counts) {
  if (counts.tp + counts.fp == 0) return std::nullopt;
  return EmpiricalPpv(counts);
}

json OutcomeToJson(const AttackGoalOutcome& outcome) {
  json j;
  j["attack"] = outcome.attack;
  j["goal"] = outcome.goal;
  j["unreachable"] = outcome.unreachable;
  j["alpha"] = OptionalToJson(outcome.alpha);
  // Formatted strings: thresholds may be +-inf, which raw JSON cannot carry.
  json phis = json::array();
  for (double phi : outcome.phi_values) phis.push_back(FormatDoubleExact(phi));
  j["phi_values"] = phis;
  j["adv"] = OptionalToJson(outcome.adv);
  j["ppv"] = OptionalToJson(outcome.ppv);
  return j;
}

AttackGoalOutcome OutcomeFromJson(const json& j) {
  AttackGoalOutcome outcome;
  outcome.attack = j.at("attack").get<std::string>();
  outcome.goal = j.at("goal").get<std::string>();
  outcome.unreachable = j.at("unreachable").get<bool>();
  outcome.alpha = OptionalFromJson(j.at("alpha"));
  for (const auto& phi : j.at("phi_values")) {
    outcome.phi_values.push_back(std::stod(phi.get<std::string>()));
  }
  outcome.adv = OptionalFromJson(j.at("adv"));
  outcome.ppv = OptionalFromJson(j.at("ppv"));
  return outcome;
}

json CellToJson(const CellResult& cell) {
  json j;
  j["run"] = cell.run;
  j["gamma"] = cell.gamma;
  j["epsilon"] = OptionalToJson(cell.epsilon);
  j["sigma"] = OptionalToJson(cell.sigma);
  j["achieved_epsilon"] = OptionalToJson(cell.achieved_epsilon);
  j["mu"] = OptionalToJson(cell.mu);
  j["target_train_accuracy"] = cell.target_train_accuracy;
  j["target_test_accuracy"] = cell.target_test_accuracy;
  j["holdout_train_accuracy"] = cell.holdout_train_accuracy;
  j["holdout_test_accuracy"] = cell.holdout_test_accuracy;
  j["fixed_phi_loss"] = cell.fixed_phi_loss;
  json outcomes = json::array();
  for (const AttackGoalOutcome& outcome : cell.outcomes) {
    outcomes.push_back(OutcomeToJson(outcome));
  }
  j["outcomes"] = outcomes;
  return j;
}

CellResult CellFromJson(const json& j) {
  CellResult cell;
  cell.run = j.at("run").get<int>();
  cell.gamma = j.at("gamma").get<double>();
  cell.epsilon = OptionalFromJson(j.at("epsilon"));
  cell.sigma = OptionalFromJson(j.at("sigma"));
  cell.achieved_epsilon = OptionalFromJson(j.at("achieved_epsilon"));
  cell.mu = OptionalFromJson(j.at("mu"));
  cell.target_train_accuracy = j.at("target_train_accuracy").get<double>();
  cell.target_test_accuracy = j.at("target_test_accuracy").get<double>();
  cell.holdout_train_accuracy = j.at("holdout_train_accuracy").get<double>();
  cell.holdout_test_accuracy = j.at("holdout_test_accuracy").get<double>();
  cell.fixed_phi_loss = j.at("fixed_phi_loss").get<double>();
  for (const auto& outcome : j.at("outcomes")) {
    cell.outcomes.push_back(OutcomeFromJson(outcome));
  }
  return cell;
}

// (gamma, epsilon) group ordering: gamma ascending, non-private first.
bool GroupLess(const CellResult& a, const CellResult& b) {
  if (a.gamma != b.gamma) return a.gamma < b.gamma;
  const double ea = a.epsilon.value_or(-1.0);
  const double eb = b.epsilon.value_or(-1.0);
  return ea < eb;
}

bool SameGroup(const CellResult& a, const CellResult& b) {
  return a.gamma == b.gamma && a.epsilon == b.epsilon;
}

std::vector<ResultRow> Reduce(std::vector<CellResult> cells) {
  std::sort(cells.begin(), cells.end(),
            [](const CellResult& a, const CellResult& b) {
              if (!SameGroup(a, b)) return GroupLess(a, b);
              return a.run < b.run;
            });
  std::vector<ResultRow> rows;
  std::size_t begin = 0;
  while (begin < cells.size()) {
    std::size_t end = begin;
    while (end < cells.size() && SameGroup(cells[begin], cells[end])) ++end;
    const CellResult& first = cells[begin];
    for (std::size_t o = 0; o < first.outcomes.size(); ++o) {
      ResultRow row;
      row.gamma = first.gamma;
      row.epsilon = first.epsilon;
      row.attack = first.outcomes[o].attack;
      row.goal = first.outcomes[o].goal;

      std::vector<std::optional<double>> advs, ppvs;
      std::vector<double> alphas;
      std::vector<std::vector<double>> phis;
      for (std::size_t c = begin; c < end; ++c) {
        if (o >= cells[c].outcomes.size()) {
          throw std::runtime_error("Reduce: inconsistent cell outcomes");
        }
        const AttackGoalOutcome& outcome = cells[c].outcomes[o];
        if (outcome.attack != row.attack || outcome.goal != row.goal) {
          throw std::runtime_error("Reduce: inconsistent cell outcomes");
        }
        advs.push_back(outcome.adv);
        ppvs.push_back(outcome.ppv);
        if (outcome.alpha.has_value()) alphas.push_back(*outcome.alpha);
        if (!outcome.phi_values.empty()) phis.push_back(outcome.phi_values);
      }
      row.adv = Aggregate(advs);
      row.ppv = Aggregate(ppvs);
      if (!alphas.empty()) {
        double sum = 0.0;
        for (double a : alphas) sum += a;
        row.alpha = sum / static_cast<double>(alphas.size());
      }
      if (!phis.empty()) {
        std::vector<double> mean(phis[0].size(), 0.0);
        bool consistent = true;
        for (const auto& p : phis) consistent &= p.size() == mean.size();
        if (consistent) {
          for (const auto& p : phis) {
            for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += p[k];
          }
          for (double& m : mean) m /= static_cast<double>(phis.size());
          row.phi = JoinPhi(mean);
        } else {
          row.phi = "-";
        }
      } else {
        row.phi = "-";
      }
      rows.push_back(std::move(row));
    }
    begin = end;
  }
  return rows;
}

void WriteResultFiles(const fs::path& out_dir,
                      const std::vector<ResultRow>& rows) {
  std::ofstream csv(out_dir / "results.csv");
  WriteResultsCsv(csv, rows);
  std::ofstream js(out_dir / "results.json");
  js << ResultsToJson(rows) << "\n";
}

}  // namespace

std::string GoalName(const ThresholdGoal& goal) {
  switch (goal.kind) {
    case GoalKind::kMinFpr:
      return "min_fpr";
    case GoalKind::kFixedFpr:
      return "fixed_fpr_" + FormatDouble(goal.alpha);
    case GoalKind::kMaxPpv:
      return "max_ppv";
    case GoalKind::kMaxAdv:
      return "max_adv";
    case GoalKind::kFixedPhi:
      return "fixed_phi";
  }
  throw std::logic_error("GoalName: unknown goal kind");
}

ThresholdGoal ParseGoal(const std::string& name) {
  if (name == "min_fpr") return ThresholdGoal::MinFpr();
  if (name == "max_ppv") return ThresholdGoal::MaxPpv();
  if (name == "max_adv") return ThresholdGoal::MaxAdv();
  if (name == "fixed_phi") return ThresholdGoal::FixedPhi(0.0);
  const std::string prefix = "fixed_fpr_";
  if (name.rfind(prefix, 0) == 0) {
    return ThresholdGoal::FixedFpr(std::stod(name.substr(prefix.size())));
  }
  throw std::invalid_argument("ParseGoal: unknown goal '" + name + "'");
}

ExperimentConfig ExperimentConfig::FromJsonString(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig cfg;
  if (j.contains("data")) {
    const json& d = j["data"];
    cfg.data.n_features = d.value("n_features", cfg.data.n_features);
    cfg.data.n_classes = d.value("n_classes", cfg.data.n_classes);
    cfg.data.class_separation =
        d.value("class_separation", cfg.data.class_separation);
    cfg.data.within_class_noise =
        d.value("within_class_noise", cfg.data.within_class_noise);
  }
  cfg.n_train = j.value("n_train", cfg.n_train);
  if (j.contains("gammas")) cfg.gammas = j["gammas"].get<std::vector<double>>();
  if (j.contains("training")) {
    const json& t = j["training"];
    cfg.training.hidden_width =
        t.value("hidden_width", cfg.training.hidden_width);
    cfg.training.learning_rate =
        t.value("learning_rate", cfg.training.learning_rate);
    cfg.training.batch_size = t.value("batch_size", cfg.training.batch_size);
    cfg.training.epochs = t.value("epochs", cfg.training.epochs);
    cfg.training.l2_penalty = t.value("l2_penalty", cfg.training.l2_penalty);
    cfg.training.clip_norm = t.value("clip_norm", cfg.training.clip_norm);
  }
  cfg.include_non_private =
      j.value("include_non_private", cfg.include_non_private);
  if (j.contains("dp_epsilons")) {
    cfg.dp_epsilons = j["dp_epsilons"].get<std::vector<double>>();
  }
  cfg.dp_delta = j.value("dp_delta", cfg.dp_delta);
  if (j.contains("attacks")) {
    const json& a = j["attacks"];
    cfg.attacks.yeom = a.value("yeom", cfg.attacks.yeom);
    cfg.attacks.yeom_cbt = a.value("yeom_cbt", cfg.attacks.yeom_cbt);
    cfg.attacks.shokri = a.value("shokri", cfg.attacks.shokri);
    cfg.attacks.shokri_cbt = a.value("shokri_cbt", cfg.attacks.shokri_cbt);
    cfg.attacks.merlin = a.value("merlin", cfg.attacks.merlin);
    cfg.attacks.morgan = a.value("morgan", cfg.attacks.morgan);
    cfg.attacks.merlin_cfg.trials =
        a.value("merlin_trials", cfg.attacks.merlin_cfg.trials);
    cfg.attacks.merlin_cfg.sigma =
        a.value("merlin_sigma", cfg.attacks.merlin_cfg.sigma);
    cfg.attacks.shadow_cfg.n_shadows =
        a.value("n_shadows", cfg.attacks.shadow_cfg.n_shadows);
    cfg.attacks.shadow_cfg.inference_hidden_width = a.value(
        "inference_hidden_width", cfg.attacks.shadow_cfg.inference_hidden_width);
    cfg.attacks.shadow_cfg.inference_epochs =
        a.value("inference_epochs", cfg.attacks.shadow_cfg.inference_epochs);
    cfg.attacks.shadow_cfg.inference_learning_rate =
        a.value("inference_learning_rate",
                cfg.attacks.shadow_cfg.inference_learning_rate);
    if (a.contains("morgan_alpha_grid")) {
      cfg.attacks.morgan_alpha_grid =
          a["morgan_alpha_grid"].get<std::vector<double>>();
    }
  }
  if (j.contains("goals")) {
    cfg.goals.clear();
    for (const auto& goal : j["goals"]) {
      cfg.goals.push_back(ParseGoal(goal.get<std::string>()));
    }
  }
  cfg.runs = j.value("runs", cfg.runs);
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  return cfg;
}

ExperimentConfig ExperimentConfig::FromJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("ExperimentConfig: cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return FromJsonString(buffer.str());
}

std::string ExperimentConfig::ToJsonString() const {
  json j;
  j["data"] = {{"n_features", data.n_features},
               {"n_classes", data.n_classes},
               {"class_separation", data.class_separation},
               {"within_class_noise", data.within_class_noise}};
  j["n_train"] = n_train;
  j["gammas"] = gammas;
  j["training"] = {{"hidden_width", training.hidden_width},
                   {"learning_rate", training.learning_rate},
                   {"batch_size", training.batch_size},
                   {"epochs", training.epochs},
                   {"l2_penalty", training.l2_penalty},
                   {"clip_norm", training.clip_norm}};
  j["include_non_private"] = include_non_private;
  j["dp_epsilons"] = dp_epsilons;
  j["dp_delta"] = dp_delta;
  j["attacks"] = {{"yeom", attacks.yeom},
                  {"yeom_cbt", attacks.yeom_cbt},
                  {"shokri", attacks.shokri},
                  {"shokri_cbt", attacks.shokri_cbt},
                  {"merlin", attacks.merlin},
                  {"morgan", attacks.morgan},
                  {"merlin_trials", attacks.merlin_cfg.trials},
                  {"merlin_sigma", attacks.merlin_cfg.sigma},
                  {"n_shadows", attacks.shadow_cfg.n_shadows},
                  {"inference_hidden_width",
                   attacks.shadow_cfg.inference_hidden_width},
                  {"inference_epochs", attacks.shadow_cfg.inference_epochs},
                  {"inference_learning_rate",
                   attacks.shadow_cfg.inference_learning_rate},
                  {"morgan_alpha_grid", attacks.morgan_alpha_grid}};
  json goal_names = json::array();
  for (const ThresholdGoal& goal : goals) goal_names.push_back(GoalName(goal));
  j["goals"] = goal_names;
  j["runs"] = runs;
  j["master_seed"] = master_seed;
  return j.dump(2);
}

SelectApplyOutcome SelectAndApply(const AttackScores& holdout,
                                  const AttackScores& target,
                                  const ThresholdGoal& goal, double gamma) {
  SelectApplyOutcome outcome;
  try {
    outcome.selection = SelectThreshold(holdout, goal, gamma);
  } catch (const UnreachableFprError&) {
    outcome.unreachable = true;
    return outcome;
  }
  outcome.counts = ApplyThreshold(target, outcome.selection->phi);
  outcome.decisions = ThresholdDecisions(target, outcome.selection->phi);
  return outcome;
}

namespace {

CellResult ExecuteCell(const ExperimentConfig& cfg, const CellTask& task,
                       const fs::path& cell_dir) {
  fs::create_directories(cell_dir);

  CellResult cell;
  cell.run = task.run;
  cell.gamma = task.gamma;
  cell.epsilon = task.epsilon;

  // The dataset is shared across privacy settings of the same (run, gamma).
  SyntheticSpec spec = cfg.data;
  spec.seed = MixSeed(cfg.master_seed, 0x64617461 /* "data" */,
                      static_cast<uint64_t>(task.run) * 1024 +
                          static_cast<uint64_t>(task.gamma_index));
  const SplitDataset ds = Generate(spec, cfg.n_train, task.gamma);

  const uint64_t cell_seed =
      MixSeed(cfg.master_seed, 0x63656c6c /* "cell" */,
              (static_cast<uint64_t>(task.run) * 1024 +
               static_cast<uint64_t>(task.gamma_index)) *
                      64 +
                  static_cast<uint64_t>(task.eps_index + 1));

  TrainConfig train_cfg = cfg.training;
  if (task.epsilon.has_value()) {
    train_cfg.dp_mode = true;
    train_cfg.noise_multiplier = task.sigma;
    cell.sigma = task.sigma;
  }
  TrainConfig target_cfg = train_cfg;
  target_cfg.seed = MixSeed(cell_seed, 0x74617267 /* "targ" */);
  TrainConfig holdout_cfg = train_cfg;
  holdout_cfg.seed = MixSeed(cell_seed, 0x686f6c64 /* "hold" */);

  const TrainedArtifact target = Train(ds, target_cfg);
  const TrainedArtifact holdout = Train(HoldoutView(ds), holdout_cfg);

  cell.target_train_accuracy = target.train_accuracy;
  cell.target_test_accuracy = target.test_accuracy;
  cell.holdout_train_accuracy = holdout.train_accuracy;
  cell.holdout_test_accuracy = holdout.test_accuracy;
  if (target.privacy.has_value()) {
    cell.achieved_epsilon = target.privacy->dp.epsilon;
    cell.mu = target.privacy->gdp.mu;
  }

  const std::vector<Candidate> target_pool = EvaluationPool(ds);
  const std::vector<Candidate> holdout_pool = HoldoutPool(ds);

  // The adversary-visible stand-in for the expected training loss.
  {
    const std::vector<double> losses =
        BatchLosses(holdout.model, ds.holdout_train);
    double sum = 0.0;
    for (double l : losses) sum += l;
    cell.fixed_phi_loss = sum / static_cast<double>(losses.size());
  }

  const bool need_yeom =
      cfg.attacks.yeom || cfg.attacks.yeom_cbt || cfg.attacks.morgan;
  const bool need_merlin = cfg.attacks.merlin || cfg.attacks.morgan;
  const bool need_shokri = cfg.attacks.shokri || cfg.attacks.shokri_cbt;

  std::map<std::string, ScoreSets> scores;
  if (need_yeom) {
    scores["yeom"] = ScoreSets{YeomScores(holdout.model, holdout_pool),
                               YeomScores(target.model, target_pool)};
  }
  if (need_merlin) {
    MerlinConfig merlin_cfg = cfg.attacks.merlin_cfg;
    merlin_cfg.seed = MixSeed(cell_seed, 0x6d726c6e /* "mrln" */);
    scores["merlin"] =
        ScoreSets{MerlinScores(holdout.model, holdout_pool, merlin_cfg),
                  MerlinScores(target.model, target_pool, merlin_cfg)};
  }
  if (need_shokri) {
    ShadowConfig shadow_cfg = cfg.attacks.shadow_cfg;
    shadow_cfg.seed = MixSeed(cell_seed, 0x73686f6b /* "shok" */);
    const ShokriInference inference =
        ShokriInference::Fit(ds, train_cfg, shadow_cfg);
    scores["shokri"] = ScoreSets{inference.Score(holdout.model, holdout_pool),
                                 inference.Score(target.model, target_pool)};
  }

  for (const auto& [name, sets] : scores) {
    {
      std::ofstream out(cell_dir / ("scores_" + name + "_holdout.csv"));
      WriteScoresCsv(out, sets.holdout);
    }
    {
      std::ofstream out(cell_dir / ("scores_" + name + "_target.csv"));
      WriteScoresCsv(out, sets.target);
    }
  }

  struct AttackEntry {
    const char* name;
    const char* base;
    bool enabled;
    bool cbt;
  };
  const AttackEntry attack_list[] = {
      {"yeom", "yeom", cfg.attacks.yeom, false},
      {"yeom_cbt", "yeom", cfg.attacks.yeom_cbt, true},
      {"shokri", "shokri", cfg.attacks.shokri, false},
      {"shokri_cbt", "shokri", cfg.attacks.shokri_cbt, true},
      {"merlin", "merlin", cfg.attacks.merlin, false},
  };

  for (const AttackEntry& attack : attack_list) {
    if (!attack.enabled) continue;
    const ScoreSets& sets = scores.at(attack.base);
    for (const ThresholdGoal& goal : cfg.goals) {
      ThresholdGoal resolved = goal;
      if (goal.kind == GoalKind::kFixedPhi) {
        if (std::string(attack.base) == "yeom") {
          resolved.phi = cell.fixed_phi_loss;
        } else if (std::string(attack.base) == "shokri") {
          resolved.phi = 0.5;
        } else {
          continue;  // no canonical fixed threshold for the ratio attack
        }
      }
      AttackGoalOutcome outcome;
      outcome.attack = attack.name;
      outcome.goal = GoalName(goal);

      if (!attack.cbt) {
        const SelectApplyOutcome result =
            SelectAndApply(sets.holdout, sets.target, resolved, task.gamma);
        if (result.unreachable) {
          outcome.unreachable = true;
        } else {
          outcome.alpha = goal.kind == GoalKind::kFixedFpr
                              ? goal.alpha
                              : result.selection->achieved_alpha;
          outcome.phi_values = {result.selection->phi};
          outcome.adv = Advantage(*result.counts);
          outcome.ppv = TryEmpiricalPpv(*result.counts);
          WriteDecisionsCsv(cell_dir / ("decisions_" + outcome.attack + "_" +
                                        outcome.goal + ".csv"),
                            sets.target, result.decisions);
        }
      } else {
        try {
          const ClassBasedResult result = ClassBasedThresholds(
              sets.holdout, sets.target, resolved, task.gamma);
          std::vector<double> phis, alphas;
          for (const auto& [cls, sel] : result.per_class) {
            phis.push_back(sel.phi);
            alphas.push_back(sel.achieved_alpha);
          }
          outcome.phi_values = {*std::min_element(phis.begin(), phis.end()),
                                Median(phis),
                                *std::max_element(phis.begin(), phis.end())};
          outcome.alpha = goal.kind == GoalKind::kFixedFpr ? goal.alpha
                                                           : Median(alphas);
          outcome.adv = Advantage(result.counts);
          outcome.ppv = TryEmpiricalPpv(result.counts);
          WriteDecisionsCsv(cell_dir / ("decisions_" + outcome.attack + "_" +
                                        outcome.goal + ".csv"),
                            sets.target, result.decisions);
        } catch (const UnreachableFprError&) {
          outcome.unreachable = true;
        }
      }
      cell.outcomes.push_back(std::move(outcome));
    }
  }

  if (cfg.attacks.morgan) {
    AttackGoalOutcome outcome;
    outcome.attack = "morgan";
    outcome.goal = "max_ppv";
    const ScoreSets& loss_sets = scores.at("yeom");
    const ScoreSets& ratio_sets = scores.at("merlin");
    try {
      const MorganSelection selection =
          SelectMorgan(loss_sets.holdout, ratio_sets.holdout, task.gamma,
                       cfg.attacks.morgan_alpha_grid);
      const MorganThresholds& th = selection.thresholds;
      outcome.phi_values = {th.loss_lower, th.loss_upper, th.ratio_min};
      const ConfusionCounts counts =
          ApplyMorgan(loss_sets.target, ratio_sets.target, th);
      outcome.adv = Advantage(counts);
      outcome.ppv = TryEmpiricalPpv(counts);
      WriteDecisionsCsv(
          cell_dir / "decisions_morgan_max_ppv.csv", loss_sets.target,
          MorganDecisions(loss_sets.target, ratio_sets.target, th));
    } catch (const UnreachableFprError&) {
      outcome.unreachable = true;
    }
    cell.outcomes.push_back(std::move(outcome));
  }

  std::ofstream out(cell_dir / "cell.json");
  out << CellToJson(cell).dump(2) << "\n";
  return cell;
}

}  // namespace

ExperimentResult RunExperiment(const ExperimentConfig& cfg,
                               const fs::path& out_dir, int threads) {
  if (cfg.runs < 1) {
    throw std::invalid_argument("ExperimentConfig: runs must be >= 1");
  }
  if (cfg.gammas.empty()) {
    throw std::invalid_argument("ExperimentConfig: gammas must be non-empty");
  }
  for (double gamma : cfg.gammas) {
    if (!(gamma > 0.0)) {
      throw std::invalid_argument("ExperimentConfig: gammas must be > 0");
    }
  }
  if (!cfg.include_non_private && cfg.dp_epsilons.empty()) {
    throw std::invalid_argument("ExperimentConfig: no privacy settings");
  }

  fs::create_directories(out_dir);
  const fs::path cells_dir = out_dir / "cells";
  fs::create_directories(cells_dir);
  {
    std::ofstream out(out_dir / "config.json");
    out << cfg.ToJsonString() << "\n";
  }

  // One sigma per epsilon; tau and T depend only on the training config.
  const auto steps_per_epoch =
      (cfg.n_train + cfg.training.batch_size - 1) / cfg.training.batch_size;
  std::vector<double> sigmas;
  for (double epsilon : cfg.dp_epsilons) {
    sigmas.push_back(SigmaForTargetEpsilon(
        PrivacyParams{epsilon, cfg.dp_delta},
        static_cast<double>(cfg.training.batch_size) / cfg.n_train,
        static_cast<int64_t>(steps_per_epoch) * cfg.training.epochs));
  }

  std::vector<CellTask> tasks;
  for (int run = 0; run < cfg.runs; ++run) {
    for (std::size_t g = 0; g < cfg.gammas.size(); ++g) {
      if (cfg.include_non_private) {
        tasks.push_back(CellTask{run, static_cast<int>(g), -1, cfg.gammas[g],
                                 std::nullopt, 0.0});
      }
      for (std::size_t e = 0; e < cfg.dp_epsilons.size(); ++e) {
        tasks.push_back(CellTask{run, static_cast<int>(g), static_cast<int>(e),
                                 cfg.gammas[g], cfg.dp_epsilons[e], sigmas[e]});
      }
    }
  }

  std::vector<CellResult> cells(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      try {
        cells[i] = ExecuteCell(cfg, tasks[i], cells_dir / CellDirName(tasks[i]));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        break;
      }
    }
  };

  std::size_t n_threads = threads > 0
                              ? static_cast<std::size_t>(threads)
                              : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, tasks.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t + 1 < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  ExperimentResult result;
  result.cells = cells;
  result.rows = Reduce(std::move(cells));
  WriteResultFiles(out_dir, result.rows);
  return result;
}

ExperimentResult RebuildResults(const fs::path& out_dir) {
  const fs::path cells_dir = out_dir / "cells";
  if (!fs::is_directory(cells_dir)) {
    throw std::runtime_error("RebuildResults: no cells directory under " +
                             out_dir.string());
  }
  std::vector<fs::path> cell_dirs;
  for (const auto& entry : fs::directory_iterator(cells_dir)) {
    if (entry.is_directory()) cell_dirs.push_back(entry.path());
  }
  std::sort(cell_dirs.begin(), cell_dirs.end());

  std::vector<CellResult> cells;
  for (const fs::path& dir : cell_dirs) {
    std::ifstream in(dir / "cell.json");
    if (!in) {
      throw std::runtime_error("RebuildResults: missing cell.json in " +
                               dir.string());
    }
    json j;
    in >> j;
    CellResult cell = CellFromJson(j);
    // Metrics come from the stored raw decisions, not the cached values.
    for (AttackGoalOutcome& outcome : cell.outcomes) {
      if (outcome.unreachable) {
        outcome.adv.reset();
        outcome.ppv.reset();
        continue;
      }
      const fs::path decisions =
          dir / ("decisions_" + outcome.attack + "_" + outcome.goal + ".csv");
      const ConfusionCounts counts = ReadDecisionsCsv(decisions);
      outcome.adv = Advantage(counts);
      outcome.ppv = TryEmpiricalPpv(counts);
    }
    cells.push_back(std::move(cell));
  }

  ExperimentResult result;
  result.cells = cells;
  result.rows = Reduce(std::move(cells));
  WriteResultFiles(out_dir, result.rows);
  return result;
}

void WriteResultsCsv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "gamma,epsilon,attack,goal,alpha,phi,adv_mean,adv_std,ppv_mean,"
         "ppv_std,excluded_runs\n";
  for (const ResultRow& row : rows) {
    out << FormatDouble(row.gamma) << ',' << FormatOptional(row.epsilon) << ','
        << row.attack << ',' << row.goal << ',' << FormatOptional(row.alpha)
        << ',' << row.phi << ',' << FormatOptional(row.adv.mean) << ','
        << FormatOptional(row.adv.stddev) << ','
        << FormatOptional(row.ppv.mean) << ','
        << FormatOptional(row.ppv.stddev) << ',' << row.ppv.excluded_runs
        << "\n";
  }
}

std::string ResultsToJson(const std::vector<ResultRow>& rows) {
  json array = json::array();
  for (const ResultRow& row : rows) {
    json j;
    j["gamma"] = row.gamma;
    j["epsilon"] = OptionalToJson(row.epsilon);
    j["attack"] = row.attack;
    j["goal"] = row.goal;
    j["alpha"] = OptionalToJson(row.alpha);
    j["phi"] = row.phi;
    j["adv_mean"] = OptionalToJson(row.adv.mean);
    j["adv_std"] = OptionalToJson(row.adv.stddev);
    j["adv_excluded"] = row.adv.excluded_runs;
    j["ppv_mean"] = OptionalToJson(row.ppv.mean);
    j["ppv_std"] = OptionalToJson(row.ppv.stddev);
    j["ppv_excluded"] = row.ppv.excluded_runs;
    j["excluded_runs"] = row.ppv.excluded_runs;
    array.push_back(j);
  }
  json root;
  root["rows"] = array;
  return root.dump(2);
}

}  // namespace privaudit
