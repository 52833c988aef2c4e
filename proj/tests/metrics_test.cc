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

#include <sstream>

#include "gtest/gtest.h"
#include "privaudit/errors.h"
#include "privaudit/rng.h"

namespace privaudit {
namespace {

TEST(AdvantageTest, HandCases) {
  EXPECT_DOUBLE_EQ(Advantage({9, 3, 7, 1}), 0.6);
  EXPECT_DOUBLE_EQ(Advantage({10, 0, 10, 0}), 1.0);
  // Decisions independent of membership: TPR == FPR.
  EXPECT_DOUBLE_EQ(Advantage({5, 5, 5, 5}), 0.0);
}

TEST(AdvantageTest, UndefinedWhenAClassIsEmpty) {
  EXPECT_THROW(Advantage({0, 3, 7, 0}), std::invalid_argument);
  EXPECT_THROW(Advantage({3, 0, 0, 1}), std::invalid_argument);
}

TEST(AdvantageTest, InvariantUnderCountScaling) {
  const ConfusionCounts counts{9, 3, 7, 1};
  for (int64_t k : {2, 5, 17}) {
    EXPECT_DOUBLE_EQ(
        Advantage({counts.tp * k, counts.fp * k, counts.tn * k, counts.fn * k}),
        Advantage(counts));
  }
}

TEST(EmpiricalPpvTest, HandCases) {
  EXPECT_DOUBLE_EQ(EmpiricalPpv({3, 1, 0, 0}), 0.75);
  EXPECT_DOUBLE_EQ(EmpiricalPpv({0, 5, 0, 0}), 0.0);
  EXPECT_THROW(EmpiricalPpv({0, 0, 5, 5}), NoPositivePredictionsError);
}

TEST(EmpiricalPpvTest, RandomGuessingOnBalancedPoolIsNearHalf) {
  Rng rng(3);
  ConfusionCounts counts;
  for (int i = 0; i < 10000; ++i) {
    const bool member = i % 2 == 0;
    const bool predicted = rng.Uniform() < 0.5;
    if (predicted) {
      (member ? counts.tp : counts.fp)++;
    } else {
      (member ? counts.fn : counts.tn)++;
    }
  }
  EXPECT_NEAR(EmpiricalPpv(counts), 0.5, 0.02);
}

TEST(AnalyticPpvTest, HandCases) {
  EXPECT_DOUBLE_EQ(AnalyticPpv(0.5, 0.05, 10.0), 0.5);
  EXPECT_NEAR(AnalyticPpv(0.5, 0.05, 1.0), 0.9090909090909091, 1e-12);
  for (double t : {0.1, 0.5, 0.9}) {
    EXPECT_DOUBLE_EQ(AnalyticPpv(t, t, 1.0), 0.5);
  }
  EXPECT_THROW(AnalyticPpv(0.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(AnalyticPpv(0.5, 0.1, 0.0), std::invalid_argument);
}

TEST(AnalyticPpvTest, StrictlyDecreasingInGamma) {
  double prev = 1.1;
  for (double gamma : {0.1, 0.5, 1.0, 2.0, 10.0, 100.0}) {
    const double ppv = AnalyticPpv(0.6, 0.2, gamma);
    EXPECT_LT(ppv, prev);
    prev = ppv;
  }
  EXPECT_DOUBLE_EQ(AnalyticPpv(0.4, 0.0, 7.0), 1.0);
}

TEST(AnalyticPpvTest, MatchesEmpiricalOnGammaComposedPool) {
  // Pool built with gamma:1 composition; the raw-count PPV equals the
  // analytic form evaluated at the pool's own rates.
  const ConfusionCounts counts{40, 35, 465, 60};  // 100 members, 500 non
  const double gamma = 5.0;
  EXPECT_DOUBLE_EQ(EmpiricalPpv(counts),
                   AnalyticPpv(counts.Tpr(), counts.Fpr(), gamma));
}

TEST(AggregateTest, SingleRunAndHandCase) {
  const auto single = Aggregate({0.7});
  EXPECT_DOUBLE_EQ(*single.mean, 0.7);
  EXPECT_DOUBLE_EQ(*single.stddev, 0.0);
  EXPECT_EQ(single.excluded_runs, 0);

  const auto agg = Aggregate({0.9, 1.0, 1.0, 1.0, 1.0});
  EXPECT_NEAR(*agg.mean, 0.98, 1e-12);
  EXPECT_NEAR(*agg.stddev, 0.04, 1e-12);
}

TEST(AggregateTest, UndefinedRunsAreExcluded) {
  const auto agg = Aggregate({0.5, std::nullopt, 0.7, std::nullopt});
  EXPECT_NEAR(*agg.mean, 0.6, 1e-12);
  EXPECT_EQ(agg.excluded_runs, 2);

  const auto empty =
      Aggregate({std::nullopt, std::nullopt, std::nullopt, std::nullopt,
                 std::nullopt});
  EXPECT_FALSE(empty.mean.has_value());
  EXPECT_FALSE(empty.stddev.has_value());
  EXPECT_EQ(empty.excluded_runs, 5);
}

TEST(AggregateRecordsTest, PerMetricAggregation) {
  std::vector<MetricRecord> runs(3);
  runs[0]["adv"] = 0.5;
  runs[0]["ppv"] = std::nullopt;
  runs[1]["adv"] = 0.7;
  runs[1]["ppv"] = 0.9;
  runs[2]["adv"] = 0.6;
  runs[2]["ppv"] = std::nullopt;
  const RunAggregate agg = AggregateRecords(runs);
  EXPECT_NEAR(*agg.at("adv").mean, 0.6, 1e-12);
  EXPECT_EQ(agg.at("adv").excluded_runs, 0);
  EXPECT_DOUBLE_EQ(*agg.at("ppv").mean, 0.9);
  EXPECT_EQ(agg.at("ppv").excluded_runs, 2);
}

TEST(AggregateRecordsTest, CsvAndJsonOutput) {
  std::vector<MetricRecord> runs(2);
  runs[0]["adv"] = 0.5;
  runs[1]["adv"] = std::nullopt;
  const RunAggregate agg = AggregateRecords(runs);
  std::ostringstream csv;
  WriteAggregateCsv(csv, agg);
  EXPECT_EQ(csv.str(), "metric,mean,std,excluded_runs\nadv,0.5,0,1\n");
  const std::string js = AggregateToJson(agg);
  EXPECT_NE(js.find("\"adv\""), std::string::npos);
  EXPECT_NE(js.find("\"excluded_runs\":1"), std::string::npos);
}

}  // namespace
}  // namespace privaudit
