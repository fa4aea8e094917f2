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
#include <iosfwd>
#include <string>
#include <vector>

#include "monet/harness/config.hpp"
#include "monet/harness/formats.hpp"
#include "monet/verification.hpp"

namespace monet::harness {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitVerifyFailed = 2;

struct MetricsRow {
  Index epoch = 0;
  std::string split;
  double loss = 0.0;
  double accuracy = 0.0;
  double wall_ms = 0.0;
};

/// "epoch,split,loss,accuracy,wall_ms" with a header line; reals in %.17g.
std::string format_metrics(const std::vector<MetricsRow>& rows);

struct TrainResult {
  ModelFile model;
  std::vector<MetricsRow> metrics;
  double final_train_accuracy = 0.0;
};

/// Builds the initial (untrained) model for a dataset's channel/class counts.
ModelFile init_model(const RunConfig& cfg, Index channels, Index classes);

/// Warm-up (classifier-only) steps then epochs of mini-batch SGD. Batch
/// gradients are summed over samples. Batch order comes from the seed.
TrainResult run_train(const RunConfig& cfg, const Dataset& data);

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  Index total = 0;
  std::vector<std::vector<Index>> confusion;  // [true][predicted]
};

EvalResult run_eval(const ModelFile& model, const std::vector<Sample>& samples);

/// One row of the gradient-check suite. `skipped` marks an expected
/// separation-guard refusal.
struct GradCheckRow {
  GradCheckReport report;
  bool skipped = false;
  std::string note;
};

std::vector<GradCheckRow> run_gradcheck(const RunConfig& cfg);
std::string format_gradcheck(const std::vector<GradCheckRow>& rows);
bool gradcheck_passed(const std::vector<GradCheckRow>& rows);

/// One oracle check of the verify suite.
struct CheckRow {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

std::vector<CheckRow> run_verify(const RunConfig& cfg);
std::string format_checks(const std::vector<CheckRow>& rows);

struct SketchBenchRow {
  Index d_out = 0;
  SketchQuality quality;
};

std::vector<SketchBenchRow> run_sketchbench(const RunConfig& cfg);
std::string format_sketchbench(const std::vector<SketchBenchRow>& rows);

/// Full CLI dispatch: parses argv, runs the command, writes outputs, and
/// returns the exit code. Human-readable progress goes to `log`.
int run_cli(int argc, const char* const* argv, std::ostream& log, std::ostream& err);

}  // namespace monet::harness
