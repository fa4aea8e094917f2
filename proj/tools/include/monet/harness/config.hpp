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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "monet/model_head.hpp"
#include "monet/synth_data.hpp"

namespace monet::harness {

enum class Command { kTrain, kEval, kGradcheck, kVerify, kSketchbench, kGenData };

std::string to_string(Command command);
Command parse_command(const std::string& name);

/// Raised for invalid configuration; the message names the offending field.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Full configuration of one CLI invocation. Every field has a default, so an
/// empty config reproduces the reference training recipe.
struct RunConfig {
  Command command = Command::kTrain;
  VariantSpec variant;  // monet, bilinear, D = 10^4

  // Optimizer.
  double lr = 1e-3;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  double clip = 1.0;  // gradients are clamped to [-clip, clip]
  Index batch_size = 16;

  Index epochs = 30;
  Index warmup_steps = 0;
  double epsilon = kDefaultEpsilon;
  bool preprocess_signed_sqrt = true;
  std::uint64_t seed = 0;

  std::filesystem::path data;
  std::filesystem::path out;
  std::filesystem::path model;
  std::string split = "test";  // eval split

  TaskSpec task;  // gen-data

  std::optional<double> tolerance;  // gradcheck override
  bool force_degenerate = true;     // gradcheck: include the separation-guard case

  Index sketch_trials = 200;
  Index sketch_d_in = 16;
  std::vector<Index> sketch_dims = {64, 256, 1024, 4096};

  bool timing = false;  // record wall-clock milliseconds in metrics

  void validate() const;
};

/// Applies a JSON config object (keys are long flag names without dashes,
/// e.g. "weight-decay"). Unknown keys are rejected.
void apply_config_json(RunConfig& cfg, const std::string& text, const std::string& origin);

/// Parses argv. Flags override values from --config. Throws ConfigError on
/// bad input; returns std::nullopt when --help was printed.
std::optional<RunConfig> parse_command_line(int argc, const char* const* argv);

}  // namespace monet::harness
