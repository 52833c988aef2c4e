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
// Leakage metrics derived from confusion counts, and mean/deviation
// aggregation across independently trained runs.

#ifndef PRIVAUDIT_METRICS_H_
#define PRIVAUDIT_METRICS_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace privaudit {

struct ConfusionCounts {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t tn = 0;
  int64_t fn = 0;

  int64_t members() const { return tp + fn; }
  int64_t non_members() const { return fp + tn; }
  double Tpr() const;  // requires members() > 0
  double Fpr() const;  // requires non_members() > 0
};

// TPR - FPR. Throws std::invalid_argument when either class is empty.
double Advantage(const ConfusionCounts& counts);

// tp / (tp + fp). Throws NoPositivePredictionsError when nothing was
// predicted a member (reported as "-" in result tables).
double EmpiricalPpv(const ConfusionCounts& counts);

// tpr / (tpr + gamma * fpr). Throws std::invalid_argument when the
// denominator is zero or gamma <= 0.
double AnalyticPpv(double tpr, double fpr, double gamma);

// Mean and population standard deviation of one metric across runs; runs
// where the metric is undefined are excluded and counted.
struct MetricAggregate {
  std::optional<double> mean;
  std::optional<double> stddev;
  int excluded_runs = 0;
};
MetricAggregate Aggregate(const std::vector<std::optional<double>>& runs);

// Aggregation of several named metrics over per-run records.
using MetricRecord = std::map<std::string, std::optional<double>>;
using RunAggregate = std::map<std::string, MetricAggregate>;
RunAggregate AggregateRecords(const std::vector<MetricRecord>& runs);

// `metric,mean,std,excluded_runs` rows; undefined aggregates print "-".
void WriteAggregateCsv(std::ostream& out, const RunAggregate& aggregate);
std::string AggregateToJson(const RunAggregate& aggregate);

}  // namespace privaudit

#endif  // PRIVAUDIT_METRICS_H_
