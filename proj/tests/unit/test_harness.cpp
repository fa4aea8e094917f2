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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "monet/harness/commands.hpp"
#include "monet/harness/config.hpp"
#include "monet/harness/formats.hpp"
#include "monet/rng.hpp"
#include "monet/verification.hpp"
#include "test_util.hpp"

namespace monet::harness {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("monet_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TaskSpec tiny_task(std::uint64_t seed) {
  TaskSpec t;
  t.seed = seed;
  t.locations = 16;
  t.channels = 5;
  t.classes = 3;
  t.train_per_class = 12;
  t.test_per_class = 6;
  return t;
}

RunConfig tiny_run(const std::string& variant, PoolingKind pooling) {
  RunConfig cfg;
  cfg.variant = VariantSpec::from_name(variant, pooling, 64);
  cfg.epochs = 3;
  cfg.batch_size = 4;
  cfg.lr = 0.05;
  cfg.seed = 5;
  return cfg;
}

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "monet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream log, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), log, err);
  if (out) *out = log.str() + err.str();
  return code;
}

TEST(FeatureFiles, RoundTripIsBitwise) {
  Rng rng(1);
  const Matrix x = random_normal(7, 3, rng);
  const std::string bytes = encode_features(x);
  EXPECT_EQ(bytes.size(), kFeatureHeaderBytes + 7 * 3 * 8);
  EXPECT_EQ(bytes.substr(0, 4), "MFF1");
  const Matrix back = decode_features(bytes);
  ASSERT_EQ(back.rows(), 7);
  ASSERT_EQ(back.cols(), 3);
  EXPECT_TRUE(back == x);

  const fs::path dir = scratch_dir("mff");
  write_features(dir / "x.mff", x);
  EXPECT_TRUE(read_features(dir / "x.mff") == x);
}

TEST(FeatureFiles, LittleEndianLayout) {
  const std::string bytes = encode_features(testing::mat({{1.0}}));
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1u);  // n = 1, low byte first
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 1u);  // C = 1
  EXPECT_EQ(static_cast<unsigned char>(bytes[19]), 0x3fu);  // top byte of 1.0
}

TEST(FeatureFiles, TruncationNamesLengths) {
  const std::string bytes = encode_features(Matrix::Ones(4, 2));
  try {
    decode_features(bytes.substr(0, bytes.size() - 5), "f.mff");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find(std::to_string(bytes.size())), std::string::npos) << what;
    EXPECT_NE(what.find(std::to_string(bytes.size() - 5)), std::string::npos) << what;
  }
  EXPECT_THROW(decode_features(bytes.substr(0, 6)), FormatError);
}

TEST(FeatureFiles, BadMagicAndTrailingBytes) {
  std::string bytes = encode_features(Matrix::Ones(2, 2));
  std::string bad = bytes;
  bad[3] = '2';
  EXPECT_THROW(decode_features(bad), FormatError);
  EXPECT_THROW(decode_features(bytes + "x"), FormatError);
}

TEST(Dataset, RoundTrip) {
  const Dataset d = generate(tiny_task(3));
  const fs::path dir = scratch_dir("dataset");
  const fs::path manifest = save_dataset(d, dir);
  const Dataset back = load_dataset(manifest);
  ASSERT_EQ(back.train.size(), d.train.size());
  ASSERT_EQ(back.test.size(), d.test.size());
  for (std::size_t i = 0; i < d.train.size(); ++i) {
    EXPECT_EQ(back.train[i].label, d.train[i].label);
    EXPECT_TRUE(back.train[i].features == d.train[i].features);
  }
  EXPECT_EQ(back.spec.seed, 3u);
  EXPECT_EQ(back.spec.channels, 5);
  // A directory resolves to its manifest.
  EXPECT_EQ(load_dataset(dir).train.size(), d.train.size());
}

TEST(Dataset, MissingSampleFileIsReported) {
  const Dataset d = generate(tiny_task(4));
  const fs::path dir = scratch_dir("dataset_missing");
  save_dataset(d, dir);
  fs::remove_all(dir / "test");
  EXPECT_THROW(load_dataset(dir), Error);
}

TEST(ModelFile, RoundTripGivesBitIdenticalEval) {
  const Dataset d = generate(tiny_task(5));
  for (PoolingKind pooling : {PoolingKind::kBilinear, PoolingKind::kSketch}) {
    const TrainResult trained = run_train(tiny_run("monet", pooling), d);
    const fs::path dir = scratch_dir("model");
    save_model(dir / "m.monet", trained.model);
    const ModelFile back = load_model(dir / "m.monet");
    EXPECT_TRUE(back.classifier.weights == trained.model.classifier.weights);
    EXPECT_TRUE(back.head.variant == trained.model.head.variant);
    EXPECT_EQ(back.head.preprocess_signed_sqrt, trained.model.head.preprocess_signed_sqrt);
    EXPECT_EQ(back.head.sketch.has_value(), pooling == PoolingKind::kSketch);
    if (back.head.sketch) EXPECT_TRUE(*back.head.sketch == *trained.model.head.sketch);

    const EvalResult a = run_eval(trained.model, d.test);
    const EvalResult b = run_eval(back, d.test);
    EXPECT_EQ(a.accuracy, b.accuracy);
    EXPECT_EQ(a.mean_loss, b.mean_loss);
    EXPECT_EQ(a.confusion, b.confusion);
    EXPECT_EQ(encode_model(back), encode_model(trained.model));
  }
}

TEST(ModelFile, CorruptionIsRejected) {
  const ModelFile m = init_model(tiny_run("monet-2", PoolingKind::kBilinear), 5, 3);
  const std::string bytes = encode_model(m);
  EXPECT_THROW(decode_model("NOT-A-MODEL\n" + bytes), FormatError);
  EXPECT_THROW(decode_model(bytes.substr(0, bytes.size() - 8)), FormatError);
  std::string wrong_version = bytes;
  wrong_version[12] = '9';
  EXPECT_THROW(decode_model(wrong_version), FormatError);
}

TEST(Train, ZeroEpochsYieldsInitialModelThatEvaluates) {
  const Dataset d = generate(tiny_task(6));
  RunConfig cfg = tiny_run("monet", PoolingKind::kBilinear);
  cfg.epochs = 0;
  const TrainResult r = run_train(cfg, d);
  EXPECT_EQ(r.model.classifier.weights.cwiseAbs().maxCoeff(), 0.0);
  const EvalResult e = run_eval(r.model, d.test);
  EXPECT_EQ(e.total, static_cast<Index>(d.test.size()));
}

TEST(Train, DeterministicMetricsAndModel) {
  const Dataset d = generate(tiny_task(7));
  for (PoolingKind pooling : {PoolingKind::kBilinear, PoolingKind::kSketch}) {
    RunConfig cfg = tiny_run("monet", pooling);
    cfg.warmup_steps = 3;
    const TrainResult a = run_train(cfg, d);
    const TrainResult b = run_train(cfg, d);
    EXPECT_EQ(format_metrics(a.metrics), format_metrics(b.metrics));
    EXPECT_EQ(encode_model(a.model), encode_model(b.model));
  }
}

TEST(Train, MetricsHaveHeaderAndRows) {
  const Dataset d = generate(tiny_task(8));
  const TrainResult r = run_train(tiny_run("monet-u", PoolingKind::kBilinear), d);
  const std::string csv = format_metrics(r.metrics);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,split,loss,accuracy,wall_ms");
  EXPECT_EQ(r.metrics.size(), 8u);  // epochs 0..3, train and test
}

TEST(Eval, OwnTrainingSetMatchesTrainLoop) {
  const Dataset d = generate(tiny_task(9));
  RunConfig cfg = tiny_run("monet-2", PoolingKind::kBilinear);
  cfg.epochs = 10;
  const TrainResult r = run_train(cfg, d);
  const EvalResult e = run_eval(r.model, d.train);
  EXPECT_GE(e.accuracy, r.final_train_accuracy - 1e-9);
  Index sum = 0;
  for (const auto& row : e.confusion) sum = std::accumulate(row.begin(), row.end(), sum);
  EXPECT_EQ(sum, e.total);
}

TEST(Eval, RowPermutedCopiesGiveSameAccuracy) {
  const Dataset d = generate(tiny_task(10));
  const TrainResult r = run_train(tiny_run("monet", PoolingKind::kSketch), d);
  std::vector<Sample> permuted = d.test;
  for (auto& s : permuted) s.features.colwise().reverseInPlace();
  const EvalResult a = run_eval(r.model, d.test);
  const EvalResult b = run_eval(r.model, permuted);
  EXPECT_EQ(a.accuracy, b.accuracy);
  EXPECT_EQ(a.mean_loss, b.mean_loss);
}

TEST(Eval, Errors) {
  const Dataset d = generate(tiny_task(11));
  const ModelFile m = init_model(tiny_run("monet", PoolingKind::kBilinear), 5, 3);
  EXPECT_THROW(run_eval(m, {}), Error);
  std::vector<Sample> wrong = {Sample{Matrix::Ones(16, 4), 0}};
  EXPECT_THROW(run_eval(m, wrong), Error);
}

TEST(Config, DefaultHyperparameters) {
  const RunConfig cfg;
  EXPECT_EQ(cfg.lr, 1e-3);
  EXPECT_EQ(cfg.batch_size, 16);
  EXPECT_EQ(cfg.momentum, 0.9);
  EXPECT_EQ(cfg.weight_decay, 5e-4);
  EXPECT_EQ(cfg.epsilon, 1e-5);
  EXPECT_EQ(cfg.clip, 1.0);
  EXPECT_EQ(cfg.variant.sketch_dim, 10000);
  EXPECT_TRUE(cfg.preprocess_signed_sqrt);
}

TEST(Config, FlagsOverrideConfigFile) {
  const fs::path dir = scratch_dir("config");
  write_file_atomic(dir / "c.json", R"({"lr": 0.01, "epochs": 4, "variant": "monet-2u"})");
  const std::string path = (dir / "c.json").string();
  const char* argv[] = {"monet", "train", "--config", path.c_str(), "--epochs", "7",
                        "--pooling", "ts", "--sketch-dim", "512", "--data", "d", "--out", "o"};
  const auto cfg = parse_command_line(14, argv);
  ASSERT_TRUE(cfg.has_value());
  EXPECT_EQ(cfg->command, Command::kTrain);
  EXPECT_EQ(cfg->lr, 0.01);
  EXPECT_EQ(cfg->epochs, 7);
  EXPECT_EQ(cfg->variant.name(), "monet-2u");
  EXPECT_EQ(cfg->variant.pooling, PoolingKind::kSketch);
  EXPECT_EQ(cfg->variant.sketch_dim, 512);
}

TEST(Config, InvalidValuesNameTheField) {
  const char* bad_lr[] = {"monet", "train", "--lr", "-1"};
  try {
    parse_command_line(4, bad_lr);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("lr"), std::string::npos);
  }
  const char* bad_variant[] = {"monet", "train", "--variant", "vgg"};
  EXPECT_THROW(parse_command_line(4, bad_variant), ConfigError);
  const char* bad_command[] = {"monet", "fly"};
  EXPECT_THROW(parse_command_line(2, bad_command), ConfigError);
  RunConfig cfg;
  EXPECT_THROW(apply_config_json(cfg, R"({"learning_rate": 1})", "x.json"), ConfigError);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({"frobnicate"}), kExitUsage);
  EXPECT_EQ(cli({"train", "--epochs", "-3"}), kExitUsage);
  EXPECT_EQ(cli({"train"}), kExitUsage);  // no data
  EXPECT_EQ(cli({"verify"}), kExitOk);
  std::string out;
  EXPECT_EQ(cli({"gradcheck", "--tol", "1e-12", "--out", scratch_dir("gc_strict").string()}, &out),
            kExitVerifyFailed);
}

TEST(Cli, GradcheckDefaultPassesWithDegenerateSkip) {
  RunConfig cfg;
  cfg.command = Command::kGradcheck;
  const auto rows = run_gradcheck(cfg);
  EXPECT_TRUE(gradcheck_passed(rows));
  const auto skipped = std::count_if(rows.begin(), rows.end(), [](const GradCheckRow& r) { return r.skipped; });
  EXPECT_EQ(skipped, 1);
  const std::string csv = format_gradcheck(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "op,max_rel_err,tol,pass");
  for (const char* op : {"hm", "ssqrt", "bilinear", "ts", "signed-sqrt", "l2", "loss"}) {
    EXPECT_NE(csv.find(std::string("\n") + op + ","), std::string::npos) << op;
  }
}

TEST(Cli, GenDataTrainEvalPipeline) {
  const fs::path dir = scratch_dir("pipeline");
  const std::string data = (dir / "data").string();
  ASSERT_EQ(cli({"gen-data", "--out", data, "--classes", "3", "--locations", "16", "--channels", "4",
                 "--train-per-class", "10", "--test-per-class", "5", "--seed", "2"}),
            kExitOk);
  const std::string run = (dir / "run").string();
  ASSERT_EQ(cli({"train", "--data", data, "--out", run, "--epochs", "2", "--variant", "monet-2",
                 "--batch-size", "4"}),
            kExitOk);
  EXPECT_TRUE(fs::exists(dir / "run" / "model.monet"));
  EXPECT_TRUE(fs::exists(dir / "run" / "metrics.csv"));
  EXPECT_EQ(cli({"eval", "--data", data, "--model", (dir / "run" / "model.monet").string(), "--out",
                 (dir / "eval").string()}),
            kExitOk);
  EXPECT_TRUE(fs::exists(dir / "eval" / "confusion.csv"));
}

}  // namespace
}  // namespace monet::harness
