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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "monet/harness/commands.hpp"
#include "monet/harness/formats.hpp"
#include "monet/model_head.hpp"
#include "monet/moment_layers.hpp"
#include "monet/synth_data.hpp"
#include "monet/verification.hpp"

namespace fs = std::filesystem;
using namespace monet;
using namespace monet::harness;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Desk-task datasets are shared between criteria; generation is deterministic.
const Dataset& desk_dataset(TaskKind kind, std::uint64_t seed) {
  static std::map<std::pair<int, std::uint64_t>, Dataset> cache;
  const auto key = std::make_pair(static_cast<int>(kind), seed);
  auto it = cache.find(key);
  if (it == cache.end()) {
    TaskSpec spec;
    spec.kind = kind;
    spec.seed = seed;
    it = cache.emplace(key, generate(spec)).first;
  }
  return it->second;
}

double desk_accuracy(const Dataset& data, const std::string& variant, PoolingKind pooling,
                     std::uint64_t seed) {
  RunConfig cfg;
  cfg.variant = VariantSpec::from_name(variant, pooling, 1024);
  cfg.seed = seed;
  const TrainResult r = run_train(cfg, data);
  return run_eval(r.model, data.test).accuracy;
}

Verdict sqrt_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(801);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = 1 + static_cast<Index>(rng.below(17));
    const Index n = m + static_cast<Index>(rng.below(static_cast<std::uint64_t>(65 - m)));
    const Matrix xt = random_normal(n, m, rng);
    const SsqrtResult r = ssqrt_forward(xt);
    worst = std::max(worst, relative_frobenius(r.y.transpose() * r.y,
                                               sqrtm_oracle(xt.transpose() * xt)));
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-10 && secs < 5.0,
          fmt("worst relative Frobenius %.3g (<= 1e-10), %.2f s (< 5 s)", worst, secs)};
}

Verdict moment_block_identity() {
  Rng rng(802);
  int ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(64));
    const Index c = 1 + static_cast<Index>(rng.below(16));
    if (verify_eq2(random_normal(n, c, rng), 1e-12)) ++ok;
  }
  return {ok == 100, fmt("%d/100 inputs hold the block identity at 1e-12", ok)};
}

Verdict ssqrt_gradient() {
  Rng rng(803);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    // Spectrum with gaps >= 0.3 between consecutive values.
    Vector s(4);
    double top = 3.0 + rng.uniform();
    for (Index i = 0; i < 4; ++i) {
      s(i) = top;
      top -= 0.3 + 0.5 * rng.uniform();
    }
    const Matrix xt = with_singular_values(10, 4, s, rng);
    const Matrix w = random_normal(10, 4, rng);
    const ScalarFn f = [&](const Vector& p) {
      return ssqrt_forward(unflatten(p, 10, 4)).y.cwiseProduct(w).sum();
    };
    const SsqrtResult r = ssqrt_forward(xt);
    const GradCheckReport rep = gradcheck("ssqrt", f, flatten(ssqrt_backward(w, r.cache)),
                                          flatten(xt), kGradStep, 1e-5);
    worst = std::max(worst, rep.max_rel_err);
  }
  return {worst <= 1e-5, fmt("worst max relative error %.3g over 20 inputs (<= 1e-5)", worst)};
}

Verdict head_gradients() {
  const auto start = std::chrono::steady_clock::now();
  RunConfig cfg;
  cfg.command = Command::kGradcheck;
  const auto rows = run_gradcheck(cfg);
  const double secs = seconds_since(start);
  int heads = 0, passed = 0;
  double worst = 0.0;
  for (const auto& row : rows) {
    if (row.report.op.rfind("head:", 0) != 0) continue;
    ++heads;
    if (row.report.pass && row.report.tolerance <= 1e-4) ++passed;
    worst = std::max(worst, row.report.max_rel_err);
  }
  return {heads == 8 && passed == 8 && secs < 60.0,
          fmt("%d/%d heads pass, worst %.3g (<= 1e-4), %.2f s (< 60 s)", passed, heads, worst, secs)};
}

Verdict sketch_unbiasedness() {
  Rng data_rng(804);
  Vector x(16), y(16);
  for (Index i = 0; i < 16; ++i) {
    x(i) = data_rng.normal();
    y(i) = x(i) + 0.5 * data_rng.normal();
  }
  Rng a(805), b(805);
  const SketchQuality q200 = sketch_quality(x, y, 64, 200, a);
  const SketchQuality q800 = sketch_quality(x, y, 64, 800, b);
  const double ratio = q800.std_error / q200.std_error;
  return {q200.bias <= 0.05 && ratio <= 0.55,
          fmt("mean %.4g vs <x,y>^2 %.4g, relative bias %.3g (<= 0.05); stderr ratio 800/200 %.3f (<= 0.55)",
              q200.mean_estimate, q200.target, q200.bias, ratio)};
}

Verdict dimension_accounting() {
  const Index full = descriptor_dim(VariantSpec::from_name("monet"), 512);
  bool sketch_ok = true;
  for (Index d : {1024, 4096, 8192, 10000}) {
    sketch_ok = sketch_ok &&
                descriptor_dim(VariantSpec::from_name("monet", PoolingKind::kSketch, d), 512) == d;
    HeadConfig cfg = HeadConfig::make(VariantSpec::from_name("monet", PoolingKind::kSketch, d), 8, 1);
    Rng rng(806);
    sketch_ok = sketch_ok && describe_forward(random_uniform(16, 8, 0.0, 1.0, rng), cfg).z.size() == d;
  }
  return {full == 263169 && sketch_ok,
          fmt("C = 512: homogeneous bilinear length %lld (263169); sketch length == D: %s",
              static_cast<long long>(full), sketch_ok ? "yes" : "no")};
}

Verdict covariance_task() {
  std::ostringstream detail;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto start = std::chrono::steady_clock::now();
    const Dataset& data = desk_dataset(TaskKind::kCovarianceOnly, seed);
    const double gen_secs = seconds_since(start);
    const auto t1 = std::chrono::steady_clock::now();
    const double baseline = baseline_meanpool(data.train, data.test);
    const double base_secs = seconds_since(t1) + gen_secs;
    const auto t2 = std::chrono::steady_clock::now();
    const double monet2 = desk_accuracy(data, "monet-2", PoolingKind::kBilinear, seed);
    const double monet_secs = seconds_since(t2) + gen_secs;
    ok = ok && baseline <= 0.40 && monet2 >= 0.95 && base_secs < 120.0 && monet_secs < 120.0;
    detail << fmt("seed %llu: baseline %.3f (<= 0.40, %.1f s), monet-2 %.3f (>= 0.95, %.1f s); ",
                  static_cast<unsigned long long>(seed), baseline, base_secs, monet2, monet_secs);
  }
  std::string s = detail.str();
  s.resize(s.size() - 2);
  return {ok, s};
}

Verdict normalization_ordering() {
  std::map<std::string, std::vector<double>> acc;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset& data = desk_dataset(TaskKind::kMeanAndCovariance, seed);
    for (const char* v : {"monet", "monet-u", "monet-2", "monet-2u"}) {
      acc[v].push_back(desk_accuracy(data, v, PoolingKind::kBilinear, seed));
    }
  }
  const double m = median(acc["monet"]), mu = median(acc["monet-u"]);
  const double m2 = median(acc["monet-2"]), m2u = median(acc["monet-2u"]);
  return {m >= mu && m2 >= m2u,
          fmt("median test accuracy: monet %.4f >= monet-u %.4f; monet-2 %.4f >= monet-2u %.4f", m, mu,
              m2, m2u)};
}

Verdict compact_gap() {
  std::ostringstream detail;
  double worst_gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Dataset& data = desk_dataset(TaskKind::kCovarianceOnly, seed);
    const double full = desk_accuracy(data, "monet", PoolingKind::kBilinear, seed);
    const double sketch = desk_accuracy(data, "monet", PoolingKind::kSketch, seed);
    worst_gap = std::max(worst_gap, full - sketch);
    detail << fmt("seed %llu bilinear %.3f ts %.3f; ", static_cast<unsigned long long>(seed), full, sketch);
  }
  const double saving = 1.0 - 10000.0 / (513.0 * 513.0);
  detail << fmt("worst gap %.1f points (<= 3); size reduction at C = 512, D = 1e4: %.4f (>= 0.96)",
                100.0 * worst_gap, saving);
  return {worst_gap <= 0.03 && saving >= 0.96, detail.str()};
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "monet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream log, err;
  return run_cli(static_cast<int>(argv.size()), argv.data(), log, err);
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files[fs::relative(entry.path(), dir).string()] = read_file(entry.path());
  }
  return files;
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "monet_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::map<std::string, std::string>> runs;
  std::vector<std::vector<int>> codes(2);
  std::size_t run = 0;
  for (const char* tag : {"a", "b"}) {
    const fs::path dir = root / tag;
    const std::string data = (dir / "data").string();
    const std::vector<std::vector<std::string>> commands = {
        {"gen-data", "--out", data, "--train-per-class", "40", "--test-per-class", "10", "--seed", "3"},
        {"train", "--data", data, "--out", (dir / "bil").string(), "--epochs", "3", "--warmup-steps",
         "4", "--seed", "3"},
        {"train", "--data", data, "--out", (dir / "ts").string(), "--epochs", "3", "--pooling", "ts",
         "--sketch-dim", "256", "--variant", "monet-2", "--seed", "3"},
        {"eval", "--data", data, "--model", (dir / "bil" / "model.monet").string(), "--out",
         (dir / "eval").string()},
        {"gradcheck", "--out", (dir / "gc").string(), "--seed", "3"},
        {"sketchbench", "--out", (dir / "sb").string(), "--sketch-trials", "50", "--seed", "3"},
    };
    for (const auto& c : commands) codes[run].push_back(cli(c));
    runs.push_back(snapshot(dir));
    ++run;
  }
  const bool same = runs[0] == runs[1] && codes[0] == codes[1];
  std::size_t n = runs[0].size();
  fs::remove_all(root);
  return {same && n > 0,
          fmt("%zu output files and exit codes from gen-data/train/eval/gradcheck/sketchbench, identical "
              "across repeats: %s",
              n, same ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"sqrt-equivalence", sqrt_equivalence},
      {"moment-block-identity", moment_block_identity},
      {"ssqrt-gradient", ssqrt_gradient},
      {"head-gradients", head_gradients},
      {"sketch-unbiasedness", sketch_unbiasedness},
      {"dimension-accounting", dimension_accounting},
      {"covariance-task", covariance_task},
      {"normalization-ordering", normalization_ordering},
      {"compact-vs-full", compact_gap},
      {"determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
