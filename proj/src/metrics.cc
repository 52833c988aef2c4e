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

#include "privaudit/metrics.h"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "privaudit/errors.h"

namespace privaudit {

double ConfusionCounts::Tpr() const {
  if (members() == 0) {
    throw std::invalid_argument("ConfusionCounts: no members, TPR undefined");
  }
  return static_cast<double>(tp) / static_cast<double>(members());
}

double ConfusionCounts::Fpr() const {
  if (non_members() == 0) {
    throw std::invalid_argument(
        "ConfusionCounts: no non-members, FPR undefined");
  }
  return static_cast<double>(fp) / static_cast<double>(non_members());
}

double Advantage(const ConfusionCounts& counts) {
  return counts.Tpr() - counts.Fpr();
}

double EmpiricalPpv(const ConfusionCounts& counts) {
  if (counts.tp + counts.fp == 0) {
    throw NoPositivePredictionsError(
        "EmpiricalPpv: no positive predictions, PPV undefined");
  }
  return static_cast<double>(counts.tp) /
         static_cast<double>(counts.tp + counts.fp);
}

double AnalyticPpv(double tpr, double fpr, double gamma) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("AnalyticPpv: gamma must be > 0");
  }
  const double denom = tpr + gamma * fpr;
  if (denom == 0.0) {
    throw std::invalid_argument("AnalyticPpv: zero denominator");
  }
  return tpr / denom;
}

MetricAggregate Aggregate(const std::vector<std::optional<double>>& runs) {
  if (runs.empty()) {
    throw std::invalid_argument("Aggregate: no runs");
  }
  MetricAggregate agg;
  double sum = 0.0;
  int64_t count = 0;
  for (const auto& value : runs) {
    if (value.has_value()) {
      sum += *value;
      ++count;
    } else {
      ++agg.excluded_runs;
    }
  }
  if (count == 0) return agg;
  const double mean = sum / static_cast<double>(count);
  double sq = 0.0;
  for (const auto& value : runs) {
    if (value.has_value()) {
      const double d = *value - mean;
      sq += d * d;
    }
  }
  agg.mean = mean;
  // Population deviation (divide by the run count, not count - 1).
  agg.stddev = std::sqrt(sq / static_cast<double>(count));
  return agg;
}

RunAggregate AggregateRecords(const std::vector<MetricRecord>& runs) {
  if (runs.empty()) {
    throw std::invalid_argument("AggregateRecords: no runs");
  }
  RunAggregate result;
  for (const MetricRecord& record : runs) {
    for (const auto& [name, _] : record) {
      result.emplace(name, MetricAggregate{});
    }
  }
  for (auto& [name, agg] : result) {
    std::vector<std::optional<double>> values;
    values.reserve(runs.size());
    for (const MetricRecord& record : runs) {
      const auto it = record.find(name);
      values.push_back(it == record.end() ? std::nullopt : it->second);
    }
    agg = Aggregate(values);
  }
  return result;
}

namespace {

std::string FormatOptional(const std::optional<double>& value) {
  if (!value.has_value()) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", *value);
  return buf;
}

}  // namespace

void WriteAggregateCsv(std::ostream& out, const RunAggregate& aggregate) {
  out << "metric,mean,std,excluded_runs\n";
  for (const auto& [name, agg] : aggregate) {
    out << name << ',' << FormatOptional(agg.mean) << ','
        << FormatOptional(agg.stddev) << ',' << agg.excluded_runs << "\n";
  }
}

std::string AggregateToJson(const RunAggregate& aggregate) {
  std::ostringstream out;
  out << "{";
  bool first = true;
  for (const auto& [name, agg] : aggregate) {
    if (!first) out << ",";
    first = false;
    out << "\"" << name << "\":{\"mean\":"
        << (agg.mean ? FormatOptional(agg.mean) : "null")
        << ",\"std\":" << (agg.stddev ? FormatOptional(agg.stddev) : "null")
        << ",\"excluded_runs\":" << agg.excluded_runs << "}";
  }
  out << "}";
  return out.str();
}

}  // namespace privaudit
