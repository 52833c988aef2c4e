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
// Synthetic multi-class data with l2-bounded records, and the four-way
// member / non-member / holdout split used by the membership experiment.

#ifndef PRIVAUDIT_DATA_H_
#define PRIVAUDIT_DATA_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

#include "privaudit/rng.h"

namespace privaudit {

// A feature vector with l2 norm <= 1 and its class label in [0, n_classes).
struct LabeledVector {
  std::vector<float> features;
  int32_t label = 0;
};

// Identity of a record: FNV-1a over the raw feature bytes. Used only for
// disjointness checks and for deriving per-record noise streams.
uint64_t RecordId(const LabeledVector& record);

// Parameters of the synthetic class-mixture distribution: class centroids
// drawn uniformly on the sphere of radius class_separation, records sampled
// as centroid + isotropic Gaussian noise, then projected onto the unit ball.
struct SyntheticSpec {
  int n_features = 20;
  int n_classes = 4;
  double class_separation = 1.0;
  double within_class_noise = 0.3;
  uint64_t seed = 0;
};

// Member / non-member candidate pools for the target model plus the
// same-shaped disjoint holdout pools used for threshold selection.
// |target_test| = ceil(gamma * |train|), likewise for the holdout split,
// and gamma = (1 - prior_p) / prior_p.
struct SplitDataset {
  std::vector<LabeledVector> train;
  std::vector<LabeledVector> target_test;
  std::vector<LabeledVector> holdout_train;
  std::vector<LabeledVector> holdout_test;
  double gamma = 1.0;
  double prior_p = 0.5;
  int n_features = 0;
  int n_classes = 0;
  uint64_t seed = 0;
};

// Throws std::invalid_argument when a spec or split invariant is violated.
void Validate(const SyntheticSpec& spec);
void Validate(const SplitDataset& ds);

// Draws the four pairwise-disjoint splits i.i.d. from the mixture. A pure
// function of (spec, n_train, gamma).
SplitDataset Generate(const SyntheticSpec& spec, int n_train, double gamma);

// One trial of the membership experiment: with probability prior_p a uniform
// member of train (bit 1), otherwise a uniform draw from target_test (bit 0).
std::pair<LabeledVector, bool> SampleCandidate(const SplitDataset& ds,
                                               Rng& rng);

// The same dataset with the holdout splits moved into the target slots, so
// the adversary-side model can be trained through the same code path.
SplitDataset HoldoutView(const SplitDataset& ds);

// Flat binary format: header (n_features, n_classes, split sizes, gamma,
// prior_p, seed), then row-major float32 features and an int32 label per
// record, splits in declaration order.
void SaveDataset(const std::filesystem::path& path, const SplitDataset& ds);
SplitDataset LoadDataset(const std::filesystem::path& path);

// Human-readable dump: split,record_id,label,f0..f{d-1}.
void ExportDatasetCsv(std::ostream& out, const SplitDataset& ds);

}  // namespace privaudit

#endif  // PRIVAUDIT_DATA_H_
