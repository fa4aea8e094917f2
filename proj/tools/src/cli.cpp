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

#include <iostream>

#include "monet/harness/commands.hpp"

namespace monet::harness {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) { write_file_atomic(path, text); }

int do_gen_data(const RunConfig& cfg, std::ostream& log) {
  TaskSpec task = cfg.task;
  task.seed = cfg.seed;
  const Dataset data = generate(task);
  const fs::path manifest = save_dataset(data, cfg.out);
  log << "wrote " << data.train.size() << " train / " << data.test.size() << " test samples to "
      << manifest.string() << "\n";
  return kExitOk;
}

int do_train(const RunConfig& cfg, std::ostream& log) {
  const Dataset data = load_dataset(cfg.data);
  const TrainResult result = run_train(cfg, data);
  save_model(cfg.out / "model.monet", result.model);
  write_text(cfg.out / "metrics.csv", format_metrics(result.metrics));
  for (const auto& row : result.metrics) {
    log << "epoch " << row.epoch << " " << row.split << " loss " << row.loss << " acc "
        << row.accuracy << "\n";
  }
  log << "model written to " << (cfg.out / "model.monet").string() << "\n";
  return kExitOk;
}

int do_eval(const RunConfig& cfg, std::ostream& log) {
  const ModelFile model = load_model(cfg.model);
  const Dataset data = load_dataset(cfg.data);
  const EvalResult r = run_eval(model, cfg.split == "train" ? data.train : data.test);
  std::string csv = "true_label";
  for (std::size_t j = 0; j < r.confusion.size(); ++j) csv += ",pred_" + std::to_string(j);
  csv += "\n";
  for (std::size_t i = 0; i < r.confusion.size(); ++i) {
    csv += std::to_string(i);
    for (Index v : r.confusion[i]) csv += "," + std::to_string(v);
    csv += "\n";
  }
  log << "accuracy " << r.accuracy << " (" << r.total << " samples, mean loss " << r.mean_loss
      << ")\n"
      << csv;
  if (!cfg.out.empty()) {
    write_text(cfg.out / "confusion.csv", csv);
    write_text(cfg.out / "eval.csv", "split,total,accuracy,loss\n" + cfg.split + "," +
                                         std::to_string(r.total) + "," +
                                         std::to_string(r.accuracy) + "," +
                                         std::to_string(r.mean_loss) + "\n");
  }
  return kExitOk;
}

int do_gradcheck(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  const auto rows = run_gradcheck(cfg);
  const std::string csv = format_gradcheck(rows);
  log << csv;
  if (!cfg.out.empty()) write_text(cfg.out / "gradcheck.csv", csv);
  if (gradcheck_passed(rows)) return kExitOk;
  err << "gradient check failures:";
  for (const auto& r : rows) {
    if (!r.report.pass) err << " " << r.report.op;
  }
  err << "\n";
  return kExitVerifyFailed;
}

int do_verify(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  const auto rows = run_verify(cfg);
  const std::string csv = format_checks(rows);
  log << csv;
  if (!cfg.out.empty()) write_text(cfg.out / "verify.csv", csv);
  bool ok = true;
  for (const auto& r : rows) {
    if (!r.pass) {
      err << "verification failed: " << r.name << "\n";
      ok = false;
    }
  }
  return ok ? kExitOk : kExitVerifyFailed;
}

int do_sketchbench(const RunConfig& cfg, std::ostream& log) {
  const std::string csv = format_sketchbench(run_sketchbench(cfg));
  log << csv;
  if (!cfg.out.empty()) write_text(cfg.out / "sketchbench.csv", csv);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
  std::optional<RunConfig> cfg;
  try {
    cfg = parse_command_line(argc, argv);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (!cfg) return kExitOk;

  try {
    switch (cfg->command) {
      case Command::kGenData: return do_gen_data(*cfg, log);
      case Command::kTrain: return do_train(*cfg, log);
      case Command::kEval: return do_eval(*cfg, log);
      case Command::kGradcheck: return do_gradcheck(*cfg, log, err);
      case Command::kVerify: return do_verify(*cfg, log, err);
      case Command::kSketchbench: return do_sketchbench(*cfg, log);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace monet::harness
