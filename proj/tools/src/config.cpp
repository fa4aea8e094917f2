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

#include "monet/harness/config.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <functional>
#include <map>
#include <sstream>

#include "monet/harness/formats.hpp"

namespace monet::harness {

namespace {

using Setter = std::function<void(RunConfig&, const std::string&)>;

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw ConfigError("--" + key + ": invalid value '" + value + "' (expected " + expected + ")");
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  bad_value(key, v, "a real number");
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long out = std::stoll(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  bad_value(key, v, "an integer");
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long out = std::stoull(v, &used);
    if (used == v.size() && v.find('-') == std::string::npos) return out;
  } catch (const std::exception&) {
  }
  bad_value(key, v, "a non-negative integer");
}

bool to_switch(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  bad_value(key, v, "on or off");
}

template <typename Fn>
auto rethrow_as_config(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("--" + key + ": " + e.what());
  }
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"variant",
       [](RunConfig& c, const std::string& v) {
         c.variant = rethrow_as_config("variant", [&] {
           return VariantSpec::from_name(v, c.variant.pooling, c.variant.sketch_dim);
         });
       }},
      {"pooling",
       [](RunConfig& c, const std::string& v) {
         c.variant.pooling = rethrow_as_config("pooling", [&] { return parse_pooling(v); });
       }},
      {"sketch-dim", [](RunConfig& c, const std::string& v) { c.variant.sketch_dim = to_int("sketch-dim", v); }},
      {"epochs", [](RunConfig& c, const std::string& v) { c.epochs = to_int("epochs", v); }},
      {"warmup-steps", [](RunConfig& c, const std::string& v) { c.warmup_steps = to_int("warmup-steps", v); }},
      {"lr", [](RunConfig& c, const std::string& v) { c.lr = to_double("lr", v); }},
      {"momentum", [](RunConfig& c, const std::string& v) { c.momentum = to_double("momentum", v); }},
      {"weight-decay", [](RunConfig& c, const std::string& v) { c.weight_decay = to_double("weight-decay", v); }},
      {"clip", [](RunConfig& c, const std::string& v) { c.clip = to_double("clip", v); }},
      {"batch-size", [](RunConfig& c, const std::string& v) { c.batch_size = to_int("batch-size", v); }},
      {"epsilon", [](RunConfig& c, const std::string& v) { c.epsilon = to_double("epsilon", v); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = to_u64("seed", v); }},
      {"data", [](RunConfig& c, const std::string& v) { c.data = v; }},
      {"out", [](RunConfig& c, const std::string& v) { c.out = v; }},
      {"model", [](RunConfig& c, const std::string& v) { c.model = v; }},
      {"split",
       [](RunConfig& c, const std::string& v) {
         if (v != "train" && v != "test") bad_value("split", v, "train or test");
         c.split = v;
       }},
      {"preprocess-signed-sqrt",
       [](RunConfig& c, const std::string& v) { c.preprocess_signed_sqrt = to_switch("preprocess-signed-sqrt", v); }},
      {"task",
       [](RunConfig& c, const std::string& v) {
         c.task.kind = rethrow_as_config("task", [&] { return parse_task_kind(v); });
       }},
      {"classes", [](RunConfig& c, const std::string& v) { c.task.classes = to_int("classes", v); }},
      {"locations", [](RunConfig& c, const std::string& v) { c.task.locations = to_int("locations", v); }},
      {"channels", [](RunConfig& c, const std::string& v) { c.task.channels = to_int("channels", v); }},
      {"train-per-class", [](RunConfig& c, const std::string& v) { c.task.train_per_class = to_int("train-per-class", v); }},
      {"test-per-class", [](RunConfig& c, const std::string& v) { c.task.test_per_class = to_int("test-per-class", v); }},
      {"mean-separation", [](RunConfig& c, const std::string& v) { c.task.mean_separation = to_double("mean-separation", v); }},
      {"tol", [](RunConfig& c, const std::string& v) { c.tolerance = to_double("tol", v); }},
      {"degenerate-check", [](RunConfig& c, const std::string& v) { c.force_degenerate = to_switch("degenerate-check", v); }},
      {"sketch-trials", [](RunConfig& c, const std::string& v) { c.sketch_trials = to_int("sketch-trials", v); }},
      {"sketch-d-in", [](RunConfig& c, const std::string& v) { c.sketch_d_in = to_int("sketch-d-in", v); }},
      {"sketch-dims",
       [](RunConfig& c, const std::string& v) {
         std::vector<Index> dims;
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) dims.push_back(to_int("sketch-dims", item));
         if (dims.empty()) bad_value("sketch-dims", v, "a comma-separated list of integers");
         c.sketch_dims = dims;
       }},
      {"timing", [](RunConfig& c, const std::string& v) { c.timing = to_switch("timing", v); }},
  };
  return table;
}

}  // namespace

std::string to_string(Command command) {
  switch (command) {
    case Command::kTrain: return "train";
    case Command::kEval: return "eval";
    case Command::kGradcheck: return "gradcheck";
    case Command::kVerify: return "verify";
    case Command::kSketchbench: return "sketchbench";
    case Command::kGenData: return "gen-data";
  }
  return "?";
}

Command parse_command(const std::string& name) {
  for (Command c : {Command::kTrain, Command::kEval, Command::kGradcheck, Command::kVerify,
                    Command::kSketchbench, Command::kGenData}) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("unknown command '" + name +
                    "' (expected train, eval, gradcheck, verify, sketchbench or gen-data)");
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& field, const std::string& why) {
    if (!ok) throw ConfigError("--" + field + ": " + why);
  };
  require(lr > 0.0, "lr", "must be positive");
  require(momentum >= 0.0 && momentum < 1.0, "momentum", "must lie in [0, 1)");
  require(weight_decay >= 0.0, "weight-decay", "must be non-negative");
  require(clip > 0.0, "clip", "must be positive");
  require(batch_size >= 1, "batch-size", "must be >= 1");
  require(epochs >= 0, "epochs", "must be >= 0");
  require(warmup_steps >= 0, "warmup-steps", "must be >= 0");
  require(epsilon > 0.0, "epsilon", "must be positive");
  require(variant.sketch_dim >= 1, "sketch-dim", "must be >= 1");
  require(sketch_trials >= 1, "sketch-trials", "must be >= 1");
  require(sketch_d_in >= 1, "sketch-d-in", "must be >= 1");
  for (Index d : sketch_dims) require(d >= 1, "sketch-dims", "entries must be >= 1");
  if (tolerance) require(*tolerance > 0.0, "tol", "must be positive");
  switch (command) {
    case Command::kTrain:
      require(!data.empty(), "data", "required for train");
      require(!out.empty(), "out", "required for train");
      break;
    case Command::kEval:
      require(!data.empty(), "data", "required for eval");
      require(!model.empty(), "model", "required for eval");
      break;
    case Command::kGenData:
      require(!out.empty(), "out", "required for gen-data");
      try {
        task.validate();
      } catch (const Error& e) {
        throw ConfigError(std::string("--locations/--channels/--classes: ") + e.what());
      }
      break;
    default:
      break;
  }
}

void apply_config_json(RunConfig& cfg, const std::string& text, const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(origin + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError(origin + ": config must be a JSON object");
  const auto& table = setters();
  for (const auto& [key, value] : j.items()) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(origin + ": unknown key '" + key + "'");
    std::string s;
    if (value.is_string()) {
      s = value.get<std::string>();
    } else if (value.is_boolean()) {
      s = value.get<bool>() ? "on" : "off";
    } else if (value.is_array()) {
      for (const auto& item : value) s += (s.empty() ? "" : ",") + item.dump();
    } else {
      s = value.dump();
    }
    it->second(cfg, s);
  }
}

std::optional<RunConfig> parse_command_line(int argc, const char* const* argv) {
  CLI::App app{"MoNet moment-embedding pooling harness"};
  app.set_help_flag("-h,--help", "Print help");
  std::string command;
  std::string config_path;
  app.add_option("command", command, "train | eval | gradcheck | verify | sketchbench | gen-data")
      ->required();
  app.add_option("--config", config_path, "JSON config file; flags override its values");

  std::map<std::string, std::string> given;
  std::map<std::string, CLI::Option*> options;
  for (const auto& [key, setter] : setters()) {
    options[key] = app.add_option("--" + key, given[key]);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  RunConfig cfg;
  cfg.command = parse_command(command);
  if (!config_path.empty()) apply_config_json(cfg, read_file(config_path), config_path);
  // Apply flags in table order so that --variant/--pooling combine regardless
  // of their position on the command line.
  for (const auto& [key, setter] : setters()) {
    if (options[key]->count() > 0) setter(cfg, given[key]);
  }
  cfg.validate();
  return cfg;
}

}  // namespace monet::harness
