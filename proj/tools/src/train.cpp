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

#include <chrono>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "monet/harness/commands.hpp"
#include "monet/rng.hpp"

namespace monet::harness {

namespace {

// Sub-streams of the run seed.
constexpr std::uint64_t kSketchStream = 1;
constexpr std::uint64_t kWarmupStream = 2;
constexpr std::uint64_t kEpochStream = 3;

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void shuffle(std::vector<std::size_t>& order, Rng& rng) {
  // Fisher-Yates with the project generator (std::shuffle is not portable).
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
}

Index class_count(const Dataset& data) {
  Index classes = data.spec.classes;
  for (const auto* split : {&data.train, &data.test}) {
    for (const auto& s : *split) classes = std::max(classes, s.label + 1);
  }
  return classes;
}

void check_samples(const std::vector<Sample>& samples, Index channels, Index classes,
                   const char* what) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.features.cols() != channels) {
      std::ostringstream os;
      os << what << " sample " << i << " has " << s.features.cols() << " channels, expected "
         << channels;
      throw InvalidArgument(os.str());
    }
    if (s.label < 0 || s.label >= classes) {
      std::ostringstream os;
      os << what << " sample " << i << " has label " << s.label << " outside [0, " << classes
         << ")";
      throw InvalidArgument(os.str());
    }
  }
}

struct SplitScore {
  double loss = 0.0;
  double accuracy = 0.0;
};

SplitScore score(const std::vector<Vector>& z, const std::vector<Sample>& samples,
                 const ClassifierParams& params) {
  SplitScore out;
  Index correct = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const Vector logits = classifier_forward(z[i], params);
    out.loss += loss_softmax_ce(logits, samples[i].label).loss;
    Index pred = 0;
    logits.maxCoeff(&pred);
    if (pred == samples[i].label) ++correct;
  }
  out.loss /= static_cast<double>(z.size());
  out.accuracy = static_cast<double>(correct) / static_cast<double>(z.size());
  return out;
}

std::vector<Vector> describe_all(const std::vector<Sample>& samples, const HeadConfig& head) {
  std::vector<Vector> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(describe_forward(s.features, head).z);
  return out;
}

}  // namespace

std::string format_metrics(const std::vector<MetricsRow>& rows) {
  std::string out = "epoch,split,loss,accuracy,wall_ms\n";
  for (const auto& r : rows) {
    out += std::to_string(r.epoch) + "," + r.split + "," + format_real(r.loss) + "," +
           format_real(r.accuracy) + "," + format_real(r.wall_ms) + "\n";
  }
  return out;
}

ModelFile init_model(const RunConfig& cfg, Index channels, Index classes) {
  ModelFile model;
  model.channels = channels;
  const Rng root(cfg.seed);
  model.head = HeadConfig::make(cfg.variant, channels, root.split(kSketchStream).next_u64());
  model.head.epsilon = cfg.epsilon;
  model.head.guard = GuardMode::kTrain;
  model.head.preprocess_signed_sqrt = cfg.preprocess_signed_sqrt;
  model.head.validate(channels);
  model.classifier = ClassifierParams::zeros(classes, descriptor_dim(cfg.variant, channels));
  model.metadata.seed = cfg.seed;
  model.metadata.epochs = cfg.epochs;
  model.metadata.warmup_steps = cfg.warmup_steps;
  return model;
}

TrainResult run_train(const RunConfig& cfg, const Dataset& data) {
  if (data.train.empty()) throw InvalidArgument("run_train: training set is empty");
  const Index channels = data.train.front().features.cols();
  const Index classes = class_count(data);
  if (classes < 2) throw InvalidArgument("run_train: need at least two classes");
  check_samples(data.train, channels, classes, "train");
  check_samples(data.test, channels, classes, "test");

  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    if (!cfg.timing) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  };

  TrainResult result;
  result.model = init_model(cfg, channels, classes);
  ModelFile& model = result.model;

  // The descriptor stage has no trainable parameters, so it is evaluated once.
  const std::vector<Vector> train_z = describe_all(data.train, model.head);
  const std::vector<Vector> test_z = describe_all(data.test, model.head);

  OptimState opt;
  opt.lr = cfg.lr;
  opt.momentum = cfg.momentum;
  opt.weight_decay = cfg.weight_decay;
  opt.clip_lo = -cfg.clip;
  opt.clip_hi = cfg.clip;
  opt.reset(model.classifier);

  auto step_on = [&](std::span<const std::size_t> batch) {
    HeadGradients grad = HeadGradients::zeros_like(model.classifier);
    for (std::size_t idx : batch) {
      const LossResult l =
          loss_softmax_ce(classifier_forward(train_z[idx], model.classifier), data.train[idx].label);
      grad += classifier_backward(l.grad_logits, train_z[idx]);
    }
    sgd_step(model.classifier, grad, opt);
  };

  auto record = [&](Index epoch) {
    const SplitScore tr = score(train_z, data.train, model.classifier);
    result.metrics.push_back({epoch, "train", tr.loss, tr.accuracy, elapsed_ms()});
    if (!test_z.empty()) {
      const SplitScore te = score(test_z, data.test, model.classifier);
      result.metrics.push_back({epoch, "test", te.loss, te.accuracy, elapsed_ms()});
    }
    result.final_train_accuracy = tr.accuracy;
    model.metadata.final_loss = tr.loss;
  };

  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  // Warm-up: classifier-only steps over a reshuffled stream of batches.
  if (cfg.warmup_steps > 0) {
    Rng warm = Rng(cfg.seed).split(kWarmupStream);
    std::size_t cursor = order.size();
    for (Index s = 0; s < cfg.warmup_steps; ++s) {
      if (cursor >= order.size()) {
        shuffle(order, warm);
        cursor = 0;
      }
      const std::size_t len = std::min(batch, order.size() - cursor);
      step_on(std::span(order).subspan(cursor, len));
      cursor += len;
    }
  }
  record(0);

  for (Index epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng epoch_rng = Rng(cfg.seed).split(kEpochStream).split(static_cast<std::uint64_t>(epoch));
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, epoch_rng);
    for (std::size_t cursor = 0; cursor < order.size(); cursor += batch) {
      step_on(std::span(order).subspan(cursor, std::min(batch, order.size() - cursor)));
    }
    record(epoch);
  }
  return result;
}

EvalResult run_eval(const ModelFile& model, const std::vector<Sample>& samples) {
  if (samples.empty()) throw InvalidArgument("run_eval: evaluation set is empty");
  const Index classes = model.classifier.classes();
  check_samples(samples, model.channels, classes, "eval");
  EvalResult out;
  out.total = static_cast<Index>(samples.size());
  out.confusion.assign(static_cast<std::size_t>(classes),
                       std::vector<Index>(static_cast<std::size_t>(classes), 0));
  Index correct = 0;
  for (const auto& s : samples) {
    const Vector logits = classifier_forward(describe_forward(s.features, model.head).z,
                                             model.classifier);
    out.mean_loss += loss_softmax_ce(logits, s.label).loss;
    Index pred = 0;
    logits.maxCoeff(&pred);
    ++out.confusion[static_cast<std::size_t>(s.label)][static_cast<std::size_t>(pred)];
    if (pred == s.label) ++correct;
  }
  out.mean_loss /= static_cast<double>(out.total);
  out.accuracy = static_cast<double>(correct) / static_cast<double>(out.total);
  return out;
}

}  // namespace monet::harness
