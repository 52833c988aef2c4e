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
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

namespace privaudit {

namespace {

// Records are projected onto a ball slightly inside the unit sphere so the
// norm bound survives the cast to float32.
constexpr double kProjectionRadius = 1.0 - 1e-6;

template <typename T>
void WriteRaw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void ReadRaw(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

constexpr uint32_t kDatasetMagic = 0x50414453;  // "SDAP"
constexpr uint32_t kDatasetVersion = 1;

std::vector<std::vector<double>> DrawCentroids(const SyntheticSpec& spec,
                                               Rng& rng) {
  std::vector<std::vector<double>> centroids(spec.n_classes);
  for (auto& c : centroids) {
    c.resize(spec.n_features);
    double norm_sq = 0.0;
    do {
      norm_sq = 0.0;
      for (double& v : c) {
        v = rng.Gaussian();
        norm_sq += v * v;
      }
    } while (norm_sq == 0.0);
    const double scale = spec.class_separation / std::sqrt(norm_sq);
    for (double& v : c) v *= scale;
  }
  return centroids;
}

LabeledVector DrawRecord(const SyntheticSpec& spec,
                         const std::vector<std::vector<double>>& centroids,
                         Rng& rng) {
  const int label = static_cast<int>(rng.UniformInt(spec.n_classes));
  std::vector<double> x(spec.n_features);
  double norm_sq = 0.0;
  for (int j = 0; j < spec.n_features; ++j) {
    x[j] = centroids[label][j] + spec.within_class_noise * rng.Gaussian();
    norm_sq += x[j] * x[j];
  }
  const double norm = std::sqrt(norm_sq);
  if (norm > kProjectionRadius) {
    const double scale = kProjectionRadius / norm;
    for (double& v : x) v *= scale;
  }
  LabeledVector record;
  record.label = label;
  record.features.resize(spec.n_features);
  for (int j = 0; j < spec.n_features; ++j) {
    record.features[j] = static_cast<float>(x[j]);
  }
  return record;
}

void DrawSplit(const SyntheticSpec& spec,
               const std::vector<std::vector<double>>& centroids, Rng& rng,
               std::size_t count, std::unordered_set<uint64_t>& seen,
               std::vector<LabeledVector>& out) {
  out.reserve(count);
  while (out.size() < count) {
    LabeledVector record = DrawRecord(spec, centroids, rng);
    if (seen.insert(RecordId(record)).second) {
      out.push_back(std::move(record));
    }
  }
}

void WriteRecords(std::ostream& out, const std::vector<LabeledVector>& split) {
  for (const LabeledVector& r : split) {
    out.write(reinterpret_cast<const char*>(r.features.data()),
              static_cast<std::streamsize>(r.features.size() * sizeof(float)));
    WriteRaw(out, r.label);
  }
}

void ReadRecords(std::istream& in, uint64_t count, int n_features,
                 std::vector<LabeledVector>& split) {
  split.resize(count);
  for (LabeledVector& r : split) {
    r.features.resize(n_features);
    in.read(reinterpret_cast<char*>(r.features.data()),
            static_cast<std::streamsize>(n_features * sizeof(float)));
    ReadRaw(in, r.label);
  }
}

}  // namespace

uint64_t RecordId(const LabeledVector& record) {
  return Fnv1aHash(record.features.data(),
                   record.features.size() * sizeof(float));
}

void Validate(const SyntheticSpec& spec) {
  if (spec.n_features < 1) {
    throw std::invalid_argument("SyntheticSpec: n_features must be >= 1");
  }
  if (spec.n_classes < 2) {
    throw std::invalid_argument("SyntheticSpec: n_classes must be >= 2");
  }
  if (!(spec.class_separation > 0.0)) {
    throw std::invalid_argument("SyntheticSpec: class_separation must be > 0");
  }
  if (!(spec.within_class_noise > 0.0)) {
    throw std::invalid_argument(
        "SyntheticSpec: within_class_noise must be > 0");
  }
}

void Validate(const SplitDataset& ds) {
  if (ds.train.empty() || ds.holdout_train.empty()) {
    throw std::invalid_argument("SplitDataset: train splits must be non-empty");
  }
  if (!(ds.gamma > 0.0)) {
    throw std::invalid_argument("SplitDataset: gamma must be > 0");
  }
  const auto expected =
      static_cast<std::size_t>(std::ceil(ds.gamma * ds.train.size()));
  if (ds.target_test.size() != expected ||
      ds.holdout_test.size() !=
          static_cast<std::size_t>(std::ceil(ds.gamma * ds.holdout_train.size()))) {
    throw std::invalid_argument(
        "SplitDataset: test split sizes must equal ceil(gamma * train size)");
  }
  if (std::fabs(ds.gamma - (1.0 - ds.prior_p) / ds.prior_p) > 1e-9) {
    throw std::invalid_argument(
        "SplitDataset: gamma and prior_p are inconsistent");
  }
  std::unordered_set<uint64_t> seen;
  for (const auto* split :
       {&ds.train, &ds.target_test, &ds.holdout_train, &ds.holdout_test}) {
    for (const LabeledVector& r : *split) {
      if (!seen.insert(RecordId(r)).second) {
        throw std::invalid_argument("SplitDataset: splits are not disjoint");
      }
    }
  }
}

SplitDataset Generate(const SyntheticSpec& spec, int n_train, double gamma) {
  Validate(spec);
  if (n_train < 1) {
    throw std::invalid_argument("Generate: n_train must be >= 1");
  }
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("Generate: gamma must be > 0");
  }

  Rng rng(MixSeed(spec.seed, 0x64617461 /* "data" */));
  const auto centroids = DrawCentroids(spec, rng);
  const auto n_test = static_cast<std::size_t>(std::ceil(gamma * n_train));

  SplitDataset ds;
  ds.gamma = gamma;
  ds.prior_p = 1.0 / (1.0 + gamma);
  ds.n_features = spec.n_features;
  ds.n_classes = spec.n_classes;
  ds.seed = spec.seed;

  std::unordered_set<uint64_t> seen;
  DrawSplit(spec, centroids, rng, static_cast<std::size_t>(n_train), seen,
            ds.train);
  DrawSplit(spec, centroids, rng, n_test, seen, ds.target_test);
  DrawSplit(spec, centroids, rng, static_cast<std::size_t>(n_train), seen,
            ds.holdout_train);
  DrawSplit(spec, centroids, rng, n_test, seen, ds.holdout_test);
  return ds;
}

std::pair<LabeledVector, bool> SampleCandidate(const SplitDataset& ds,
                                               Rng& rng) {
  const bool member = rng.Uniform() < ds.prior_p;
  if (member) {
    return {ds.train[rng.UniformInt(static_cast<int64_t>(ds.train.size()))],
            true};
  }
  return {ds.target_test[rng.UniformInt(
              static_cast<int64_t>(ds.target_test.size()))],
          false};
}

SplitDataset HoldoutView(const SplitDataset& ds) {
  SplitDataset view = ds;
  view.train = ds.holdout_train;
  view.target_test = ds.holdout_test;
  view.holdout_train = ds.train;
  view.holdout_test = ds.target_test;
  return view;
}

void SaveDataset(const std::filesystem::path& path, const SplitDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("SaveDataset: cannot open " + path.string());
  }
  WriteRaw(out, kDatasetMagic);
  WriteRaw(out, kDatasetVersion);
  WriteRaw(out, static_cast<uint32_t>(ds.n_features));
  WriteRaw(out, static_cast<uint32_t>(ds.n_classes));
  WriteRaw(out, static_cast<uint64_t>(ds.train.size()));
  WriteRaw(out, static_cast<uint64_t>(ds.target_test.size()));
  WriteRaw(out, static_cast<uint64_t>(ds.holdout_train.size()));
  WriteRaw(out, static_cast<uint64_t>(ds.holdout_test.size()));
  WriteRaw(out, ds.gamma);
  WriteRaw(out, ds.prior_p);
  WriteRaw(out, ds.seed);
  WriteRecords(out, ds.train);
  WriteRecords(out, ds.target_test);
  WriteRecords(out, ds.holdout_train);
  WriteRecords(out, ds.holdout_test);
  if (!out) {
    throw std::runtime_error("SaveDataset: write failed for " + path.string());
  }
}

SplitDataset LoadDataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("LoadDataset: cannot open " + path.string());
  }
  uint32_t magic = 0, version = 0, n_features = 0, n_classes = 0;
  ReadRaw(in, magic);
  ReadRaw(in, version);
  if (magic != kDatasetMagic || version != kDatasetVersion) {
    throw std::runtime_error("LoadDataset: bad header in " + path.string());
  }
  ReadRaw(in, n_features);
  ReadRaw(in, n_classes);
  uint64_t sizes[4];
  for (uint64_t& s : sizes) ReadRaw(in, s);

  SplitDataset ds;
  ds.n_features = static_cast<int>(n_features);
  ds.n_classes = static_cast<int>(n_classes);
  ReadRaw(in, ds.gamma);
  ReadRaw(in, ds.prior_p);
  ReadRaw(in, ds.seed);
  ReadRecords(in, sizes[0], ds.n_features, ds.train);
  ReadRecords(in, sizes[1], ds.n_features, ds.target_test);
  ReadRecords(in, sizes[2], ds.n_features, ds.holdout_train);
  ReadRecords(in, sizes[3], ds.n_features, ds.holdout_test);
  if (!in) {
    throw std::runtime_error("LoadDataset: truncated file " + path.string());
  }
  return ds;
}

void ExportDatasetCsv(std::ostream& out, const SplitDataset& ds) {
  out << "split,record_id,label";
  for (int j = 0; j < ds.n_features; ++j) out << ",f" << j;
  out << "\n";
  const char* names[] = {"train", "target_test", "holdout_train",
                         "holdout_test"};
  const std::vector<LabeledVector>* splits[] = {
      &ds.train, &ds.target_test, &ds.holdout_train, &ds.holdout_test};
  char buf[32];
  for (int s = 0; s < 4; ++s) {
    for (const LabeledVector& r : *splits[s]) {
      out << names[s] << ',' << RecordId(r) << ',' << r.label;
      for (float v : r.features) {
        std::snprintf(buf, sizeof(buf), ",%.9g", static_cast<double>(v));
        out << buf;
      }
      out << "\n";
    }
  }
}

}  // namespace privaudit
