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

#include "privaudit/data.h"

#include <cmath>
#include <filesystem>
#include <sstream>
#include <unordered_set>

#include "gtest/gtest.h"

namespace privaudit {
namespace {

SyntheticSpec TestSpec(uint64_t seed = 42) {
  SyntheticSpec spec;
  spec.n_features = 20;
  spec.n_classes = 4;
  spec.class_separation = 1.0;
  spec.within_class_noise = 0.3;
  spec.seed = seed;
  return spec;
}

TEST(GenerateTest, SplitSizesAndDisjointness) {
  const SplitDataset ds = Generate(TestSpec(), 100, 1.0);
  EXPECT_EQ(ds.train.size(), 100u);
  EXPECT_EQ(ds.target_test.size(), 100u);
  EXPECT_EQ(ds.holdout_train.size(), 100u);
  EXPECT_EQ(ds.holdout_test.size(), 100u);
  EXPECT_NO_THROW(Validate(ds));
}

TEST(GenerateTest, GammaScalesTheTestPools) {
  const SplitDataset ds = Generate(TestSpec(), 100, 10.0);
  EXPECT_EQ(ds.train.size(), 100u);
  EXPECT_EQ(ds.target_test.size(), 1000u);
  EXPECT_NEAR(ds.prior_p, 1.0 / 11.0, 1e-12);
  const SplitDataset skewed = Generate(TestSpec(), 100, 0.35);
  EXPECT_EQ(skewed.target_test.size(), 35u);
}

TEST(GenerateTest, DeterministicForAFixedSeed) {
  const SplitDataset a = Generate(TestSpec(7), 50, 2.0);
  const SplitDataset b = Generate(TestSpec(7), 50, 2.0);
  ASSERT_EQ(a.train.size(), b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train[i].label, b.train[i].label);
    EXPECT_EQ(a.train[i].features, b.train[i].features);
  }
  const SplitDataset c = Generate(TestSpec(8), 50, 2.0);
  EXPECT_NE(RecordId(a.train[0]), RecordId(c.train[0]));
}

TEST(GenerateTest, RecordsLiveInsideTheUnitBall) {
  const SplitDataset ds = Generate(TestSpec(), 200, 1.0);
  for (const auto* split :
       {&ds.train, &ds.target_test, &ds.holdout_train, &ds.holdout_test}) {
    for (const LabeledVector& r : *split) {
      double norm_sq = 0.0;
      for (float v : r.features) norm_sq += static_cast<double>(v) * v;
      EXPECT_LE(std::sqrt(norm_sq), 1.0 + 1e-9);
    }
  }
}

TEST(GenerateTest, ClassFrequenciesAreUniform) {
  SyntheticSpec spec = TestSpec(3);
  const int n = 10000;
  const SplitDataset ds = Generate(spec, n, 0.01);
  std::vector<int> counts(spec.n_classes, 0);
  for (const LabeledVector& r : ds.train) counts[r.label]++;
  const double expected = static_cast<double>(n) / spec.n_classes;
  const double stddev =
      std::sqrt(n * (1.0 / spec.n_classes) * (1.0 - 1.0 / spec.n_classes));
  for (int c = 0; c < spec.n_classes; ++c) {
    EXPECT_NEAR(counts[c], expected, 3.0 * stddev) << "class " << c;
  }
}

TEST(GenerateTest, RejectsBadSpecs) {
  SyntheticSpec spec = TestSpec();
  spec.n_classes = 1;
  EXPECT_THROW(Generate(spec, 10, 1.0), std::invalid_argument);
  EXPECT_THROW(Generate(TestSpec(), 0, 1.0), std::invalid_argument);
  EXPECT_THROW(Generate(TestSpec(), 10, 0.0), std::invalid_argument);
}

TEST(SampleCandidateTest, DegeneratePriorAlwaysDrawsMembers) {
  SplitDataset ds = Generate(TestSpec(), 20, 1.0);
  ds.prior_p = 1.0;  // limit case: candidates are always members
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    EXPECT_TRUE(SampleCandidate(ds, rng).second);
  }
}

TEST(SampleCandidateTest, MemberFractionConcentratesAtThePrior) {
  {
    const SplitDataset ds = Generate(TestSpec(), 50, 1.0);
    Rng rng(2);
    int members = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) members += SampleCandidate(ds, rng).second;
    EXPECT_NEAR(members / static_cast<double>(draws), 0.5, 0.01);
  }
  {
    const SplitDataset ds = Generate(TestSpec(), 50, 10.0);
    Rng rng(3);
    int members = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) members += SampleCandidate(ds, rng).second;
    EXPECT_NEAR(members / static_cast<double>(draws), 1.0 / 11.0, 0.005);
  }
}

TEST(SampleCandidateTest, MembersComeFromTrainSplit) {
  const SplitDataset ds = Generate(TestSpec(), 30, 1.0);
  std::unordered_set<uint64_t> train_ids, test_ids;
  for (const LabeledVector& r : ds.train) train_ids.insert(RecordId(r));
  for (const LabeledVector& r : ds.target_test) test_ids.insert(RecordId(r));
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const auto [record, member] = SampleCandidate(ds, rng);
    const uint64_t id = RecordId(record);
    EXPECT_TRUE(member ? train_ids.count(id) > 0 : test_ids.count(id) > 0);
  }
}

TEST(HoldoutViewTest, SwapsTheSplitPairs) {
  const SplitDataset ds = Generate(TestSpec(), 25, 2.0);
  const SplitDataset view = HoldoutView(ds);
  EXPECT_EQ(RecordId(view.train[0]), RecordId(ds.holdout_train[0]));
  EXPECT_EQ(RecordId(view.target_test[0]), RecordId(ds.holdout_test[0]));
  EXPECT_EQ(RecordId(view.holdout_train[0]), RecordId(ds.train[0]));
  EXPECT_NO_THROW(Validate(view));
}

TEST(DatasetIoTest, BinaryRoundTripIsExact) {
  const SplitDataset ds = Generate(TestSpec(11), 40, 1.5);
  const auto path = std::filesystem::temp_directory_path() /
                    "privaudit_data_test_roundtrip.bin";
  SaveDataset(path, ds);
  const SplitDataset loaded = LoadDataset(path);
  std::filesystem::remove(path);

  EXPECT_EQ(loaded.n_features, ds.n_features);
  EXPECT_EQ(loaded.n_classes, ds.n_classes);
  EXPECT_EQ(loaded.seed, ds.seed);
  EXPECT_DOUBLE_EQ(loaded.gamma, ds.gamma);
  EXPECT_DOUBLE_EQ(loaded.prior_p, ds.prior_p);
  ASSERT_EQ(loaded.train.size(), ds.train.size());
  ASSERT_EQ(loaded.target_test.size(), ds.target_test.size());
  for (std::size_t i = 0; i < ds.train.size(); ++i) {
    EXPECT_EQ(loaded.train[i].features, ds.train[i].features);
    EXPECT_EQ(loaded.train[i].label, ds.train[i].label);
  }
  EXPECT_NO_THROW(Validate(loaded));
}

TEST(DatasetIoTest, CsvExportHasHeaderAndAllRows) {
  const SplitDataset ds = Generate(TestSpec(), 10, 1.0);
  std::ostringstream out;
  ExportDatasetCsv(out, ds);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find(',')), "split");
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  EXPECT_EQ(lines, 1u + 4u * 10u);
}

TEST(RecordIdTest, HashesFeatureBytes) {
  LabeledVector a{{1.0f, 2.0f}, 0};
  LabeledVector b{{1.0f, 2.0f}, 1};
  LabeledVector c{{1.0f, 2.5f}, 0};
  EXPECT_EQ(RecordId(a), RecordId(b));  // label is not part of the identity
  EXPECT_NE(RecordId(a), RecordId(c));
}

}  // namespace
}  // namespace privaudit
