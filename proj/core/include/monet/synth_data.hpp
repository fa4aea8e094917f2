// Copyright 2026 The MoNet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "monet/numkernel.hpp"

namespace monet {

enum class TaskKind { kCovarianceOnly, kMeanAndCovariance };

std::string to_string(TaskKind kind);
/// Accepts "covariance_only" and "mean_and_covariance".
TaskKind parse_task_kind(const std::string& name);

/// Synthetic classification task whose classes differ only in the moments of
/// the per-location feature distribution.
struct TaskSpec {
  TaskKind kind = TaskKind::kCovarianceOnly;
  Index classes = 4;
  Index locations = 64;  // n
  Index channels = 16;   // C
  Index train_per_class = 500;
  Index test_per_class = 200;
  double mean_separation = 1.0;  // scale of class means (mean_and_covariance only)
  double spectrum_lo = 0.2;
  double spectrum_hi = 5.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Sample {
  Matrix features;  // n x C
  Index label = 0;
};

struct Dataset {
  TaskSpec spec;
  std::vector<Sample> train;
  std::vector<Sample> test;
};

/// Class c draws every location independently from N(mu_c, Q_c^T diag(l_c) Q_c)
/// with Q_c a seeded random rotation and l_c a jittered log-spaced spectrum in
/// [spectrum_lo, spectrum_hi]. Means are zero for covariance_only and
/// mean_separation * e_c otherwise (random unit directions when classes > C).
/// Every sample uses its own sub-stream, so output is a pure function of spec.
Dataset generate(const TaskSpec& spec);

/// Class covariance matrices used by generate(), exposed for tests.
std::vector<Matrix> class_covariances(const TaskSpec& spec);
std::vector<Vector> class_means(const TaskSpec& spec);

/// First-order control: softmax regression on each sample's mean feature
/// vector (standardized with training statistics, full-batch gradient
/// descent). Returns test accuracy in [0, 1].
double baseline_meanpool(const std::vector<Sample>& train, const std::vector<Sample>& test);

}  // namespace monet
