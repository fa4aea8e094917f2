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

#include "monet/synth_data.hpp"

#include <Eigen/QR>

#include <cmath>
#include <sstream>

#include "monet/model_head.hpp"
#include "monet/rng.hpp"

namespace monet {

std::string to_string(TaskKind kind) {
  return kind == TaskKind::kCovarianceOnly ? "covariance_only" : "mean_and_covariance";
}

TaskKind parse_task_kind(const std::string& name) {
  if (name == "covariance_only") return TaskKind::kCovarianceOnly;
  if (name == "mean_and_covariance") return TaskKind::kMeanAndCovariance;
  throw InvalidArgument("unknown task kind '" + name +
                        "' (expected covariance_only or mean_and_covariance)");
}

void TaskSpec::validate() const {
  std::ostringstream os;
  if (classes < 2) {
    os << "TaskSpec: classes must be >= 2 (got " << classes << ")";
  } else if (channels < 1) {
    os << "TaskSpec: channels must be >= 1";
  } else if (locations < channels + 1) {
    os << "TaskSpec: locations (" << locations << ") must be >= channels + 1 (" << channels + 1
       << ")";
  } else if (train_per_class < 0 || test_per_class < 0) {
    os << "TaskSpec: sample counts must be non-negative";
  } else if (!(spectrum_lo > 0.0) || !(spectrum_hi >= spectrum_lo)) {
    os << "TaskSpec: spectrum bounds must satisfy 0 < lo <= hi";
  } else {
    return;
  }
  throw InvalidArgument(os.str());
}

namespace {

enum Stream : std::uint64_t {
  kClassRotation = 1,
  kClassSpectrum = 2,
  kClassMean = 3,
  kTrainSamples = 4,
  kTestSamples = 5,
};

std::uint64_t stream_id(std::uint64_t kind, std::uint64_t cls, std::uint64_t index) {
  return (kind << 56) ^ (cls << 32) ^ index;
}

Matrix random_rotation(Index dim, Rng& rng) {
  Eigen::MatrixXd g(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

struct ClassModel {
  Vector mean;
  Matrix factor;  // rows drawn as mean + factor * z
};

std::vector<ClassModel> class_models(const TaskSpec& spec) {
  const Rng root(spec.seed);
  const Index c = spec.channels;
  const double log_lo = std::log(spec.spectrum_lo);
  const double log_hi = std::log(spec.spectrum_hi);
  std::vector<ClassModel> models;
  for (Index k = 0; k < spec.classes; ++k) {
    Rng rot = root.split(stream_id(kClassRotation, static_cast<std::uint64_t>(k), 0));
    Rng spe = root.split(stream_id(kClassSpectrum, static_cast<std::uint64_t>(k), 0));
    const Matrix q = random_rotation(c, rot);
    Vector sqrt_spectrum(c);
    for (Index i = 0; i < c; ++i) {
      const double t = (static_cast<double>(i) + spe.uniform()) / static_cast<double>(c);
      sqrt_spectrum(i) = std::sqrt(std::exp(log_lo + (log_hi - log_lo) * t));
    }
    ClassModel model;
    // Sigma = Q^T diag(l) Q, so a row is mean + Q^T diag(sqrt l) z.
    model.factor = q.transpose() * sqrt_spectrum.asDiagonal();
    model.mean = Vector::Zero(c);
    if (spec.kind == TaskKind::kMeanAndCovariance) {
      if (spec.classes <= c) {
        model.mean(k) = spec.mean_separation;
      } else {
        Rng mr = root.split(stream_id(kClassMean, static_cast<std::uint64_t>(k), 0));
        for (Index i = 0; i < c; ++i) model.mean(i) = mr.normal();
        model.mean *= spec.mean_separation / model.mean.norm();
      }
    }
    models.push_back(std::move(model));
  }
  return models;
}

Sample draw_sample(const ClassModel& model, Index label, Index n, Rng rng) {
  const Index c = model.mean.size();
  Vector z(c);
  Sample s;
  s.label = label;
  s.features.resize(n, c);
  for (Index r = 0; r < n; ++r) {
    for (Index j = 0; j < c; ++j) z(j) = rng.normal();
    s.features.row(r) = (model.mean + model.factor * z).transpose();
  }
  return s;
}

}  // namespace

std::vector<Matrix> class_covariances(const TaskSpec& spec) {
  spec.validate();
  std::vector<Matrix> out;
  for (const auto& m : class_models(spec)) out.push_back(m.factor * m.factor.transpose());
  return out;
}

std::vector<Vector> class_means(const TaskSpec& spec) {
  spec.validate();
  std::vector<Vector> out;
  for (const auto& m : class_models(spec)) out.push_back(m.mean);
  return out;
}

Dataset generate(const TaskSpec& spec) {
  spec.validate();
  const Rng root(spec.seed);
  const auto models = class_models(spec);
  Dataset data;
  data.spec = spec;
  for (Index k = 0; k < spec.classes; ++k) {
    const auto cls = static_cast<std::uint64_t>(k);
    for (Index i = 0; i < spec.train_per_class; ++i) {
      data.train.push_back(draw_sample(models[k], k, spec.locations,
                                       root.split(stream_id(kTrainSamples, cls, i))));
    }
    for (Index i = 0; i < spec.test_per_class; ++i) {
      data.test.push_back(draw_sample(models[k], k, spec.locations,
                                      root.split(stream_id(kTestSamples, cls, i))));
    }
  }
  return data;
}

double baseline_meanpool(const std::vector<Sample>& train, const std::vector<Sample>& test) {
  if (train.empty() || test.empty()) {
    throw InvalidArgument("baseline_meanpool: train and test sets must be non-empty");
  }
  const Index c = train.front().features.cols();
  Index classes = 0;
  for (const auto& s : train) classes = std::max(classes, s.label + 1);
  if (classes < 2) throw InvalidArgument("baseline_meanpool: need at least two classes");

  auto mean_of = [c](const Sample& s) {
    if (s.features.cols() != c) throw InvalidArgument("baseline_meanpool: channel mismatch");
    return Vector(s.features.colwise().mean().transpose());
  };
  std::vector<Vector> feats;
  for (const auto& s : train) feats.push_back(mean_of(s));

  Vector mu = Vector::Zero(c);
  for (const auto& f : feats) mu += f;
  mu /= static_cast<double>(feats.size());
  Vector sd = Vector::Zero(c);
  for (const auto& f : feats) sd += (f - mu).cwiseAbs2();
  sd = (sd / static_cast<double>(feats.size())).cwiseSqrt().cwiseMax(1e-12);
  for (auto& f : feats) f = (f - mu).cwiseQuotient(sd);

  ClassifierParams params = ClassifierParams::zeros(classes, c);
  constexpr int kIterations = 300;
  constexpr double kStep = 0.5;
  const double inv_count = 1.0 / static_cast<double>(feats.size());
  for (int it = 0; it < kIterations; ++it) {
    HeadGradients grad = HeadGradients::zeros_like(params);
    for (std::size_t i = 0; i < feats.size(); ++i) {
      const LossResult l = loss_softmax_ce(classifier_forward(feats[i], params), train[i].label);
      grad += classifier_backward(l.grad_logits, feats[i]);
    }
    params.weights -= kStep * inv_count * grad.weights;
    params.bias -= kStep * inv_count * grad.bias;
  }

  Index correct = 0;
  for (const auto& s : test) {
    const Vector f = (mean_of(s) - mu).cwiseQuotient(sd);
    Index pred = 0;
    classifier_forward(f, params).maxCoeff(&pred);
    if (pred == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace monet
