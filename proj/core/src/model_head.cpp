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

#include "monet/model_head.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace monet {

VariantSpec VariantSpec::from_name(const std::string& name, PoolingKind pooling,
                                   Index sketch_dim) {
  VariantSpec spec;
  spec.pooling = pooling;
  spec.sketch_dim = sketch_dim;
  if (name == "monet") {
    spec.use_hm = true;
    spec.use_ssqrt = true;
  } else if (name == "monet-2") {
    spec.use_hm = false;
    spec.use_ssqrt = true;
  } else if (name == "monet-u") {
    spec.use_hm = true;
    spec.use_ssqrt = false;
  } else if (name == "monet-2u") {
    spec.use_hm = false;
    spec.use_ssqrt = false;
  } else {
    throw InvalidArgument("unknown variant '" + name +
                          "' (expected monet, monet-2, monet-u or monet-2u)");
  }
  return spec;
}

std::string VariantSpec::name() const {
  if (use_hm) return use_ssqrt ? "monet" : "monet-u";
  return use_ssqrt ? "monet-2" : "monet-2u";
}

std::string VariantSpec::label() const { return name() + "/" + to_string(pooling); }

std::vector<VariantSpec> variant_grid(Index sketch_dim) {
  std::vector<VariantSpec> grid;
  for (const char* name : {"monet", "monet-2", "monet-u", "monet-2u"}) {
    for (PoolingKind kind : {PoolingKind::kBilinear, PoolingKind::kSketch}) {
      grid.push_back(VariantSpec::from_name(name, kind, sketch_dim));
    }
  }
  return grid;
}

Index pooled_width(const VariantSpec& spec, Index channels) {
  return spec.use_hm ? channels + 1 : channels;
}

Index descriptor_dim(const VariantSpec& spec, Index channels) {
  if (spec.pooling == PoolingKind::kSketch) return spec.sketch_dim;
  const Index w = pooled_width(spec, channels);
  return w * w;
}

HeadConfig HeadConfig::make(const VariantSpec& variant, Index channels,
                            std::uint64_t sketch_seed) {
  HeadConfig cfg;
  cfg.variant = variant;
  if (variant.pooling == PoolingKind::kSketch) {
    cfg.sketch = SketchParams::generate(pooled_width(variant, channels), variant.sketch_dim,
                                        sketch_seed);
  }
  return cfg;
}

void HeadConfig::validate(Index channels) const {
  norm.validate();
  if (!(epsilon > 0.0)) throw InvalidArgument("HeadConfig: epsilon must be positive");
  if (channels < 1) throw InvalidArgument("HeadConfig: channel count must be >= 1");
  if (variant.pooling == PoolingKind::kSketch) {
    if (variant.sketch_dim < 1) throw InvalidArgument("HeadConfig: sketch_dim must be >= 1");
    if (!sketch) throw InvalidArgument("HeadConfig: sketch pooling requires sketch tables");
    if (sketch->d_out() != variant.sketch_dim ||
        sketch->d_in() != pooled_width(variant, channels)) {
      std::ostringstream os;
      os << "HeadConfig: sketch tables are " << sketch->d_in() << " -> " << sketch->d_out()
         << " but the variant needs " << pooled_width(variant, channels) << " -> "
         << variant.sketch_dim;
      throw InvalidArgument(os.str());
    }
  }
}

namespace {

std::vector<Index> canonical_order(const Matrix& x) {
  std::vector<Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    for (Index j = 0; j < x.cols(); ++j) {
      if (x(a, j) < x(b, j)) return true;
      if (x(b, j) < x(a, j)) return false;
    }
    return false;
  });
  return order;
}

}  // namespace

Descriptor describe_forward(const Matrix& x, const HeadConfig& cfg) {
  if (x.rows() < 1 || x.cols() < 1) {
    throw InvalidArgument("describe_forward: empty feature map " + shape_string(x));
  }
  require_finite(x, "describe_forward");
  cfg.validate(x.cols());

  Descriptor out;
  DescriptorTape& tape = out.tape;
  tape.n = x.rows();
  tape.c = x.cols();
  tape.order = canonical_order(x);

  tape.preprocessed.resize(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) tape.preprocessed.row(r) = x.row(tape.order[r]);
  if (cfg.preprocess_signed_sqrt) tape.preprocessed = signed_sqrt_features(tape.preprocessed);

  Matrix mapped = cfg.variant.use_hm ? hm_forward(tape.preprocessed).matrix
                                     : scale_forward(tape.preprocessed);
  if (cfg.variant.use_ssqrt) {
    SsqrtResult sq = ssqrt_forward(mapped, cfg.epsilon);
    tape.pool_input = std::move(sq.y);
    tape.svd = std::move(sq.cache);
  } else {
    tape.pool_input = std::move(mapped);
  }

  tape.pooled = cfg.variant.pooling == PoolingKind::kBilinear
                    ? bilinear_pool_forward(tape.pool_input).values
                    : ts_pool_forward(tape.pool_input, *cfg.sketch).values;
  tape.rooted = signed_sqrt_forward(tape.pooled);
  out.z = l2_normalize_forward(tape.rooted, cfg.norm);
  return out;
}

Matrix describe_backward(const Vector& grad_z, const DescriptorTape& tape, const HeadConfig& cfg) {
  if (grad_z.size() != tape.rooted.size()) {
    throw InvalidArgument("describe_backward: gradient length does not match descriptor");
  }
  const Vector grad_rooted = l2_normalize_backward(grad_z, tape.rooted, cfg.norm);
  const Vector grad_pooled = signed_sqrt_backward(grad_rooted, tape.pooled, cfg.norm);
  Matrix grad = cfg.variant.pooling == PoolingKind::kBilinear
                    ? bilinear_pool_backward(grad_pooled, tape.pool_input)
                    : ts_pool_backward(grad_pooled, tape.pool_input, *cfg.sketch);
  if (cfg.variant.use_ssqrt) grad = ssqrt_backward(grad, *tape.svd, cfg.guard);
  grad = cfg.variant.use_hm ? hm_backward(grad) : scale_backward(grad);

  if (cfg.preprocess_signed_sqrt) {
    // d/dx sign(x) sqrt|x| = 1 / (2 sqrt|x|), guarded like the pooled root.
    for (Index r = 0; r < grad.rows(); ++r) {
      for (Index j = 0; j < grad.cols(); ++j) {
        const double root = std::abs(tape.preprocessed(r, j));
        grad(r, j) /= 2.0 * std::max(root, cfg.norm.sqrt_guard);
      }
    }
  }

  Matrix unpermuted(grad.rows(), grad.cols());
  for (Index r = 0; r < grad.rows(); ++r) unpermuted.row(tape.order[r]) = grad.row(r);
  return unpermuted;
}

ClassifierParams ClassifierParams::zeros(Index classes, Index dim) {
  ClassifierParams p;
  p.weights = Matrix::Zero(classes, dim);
  p.bias = Vector::Zero(classes);
  return p;
}

Vector classifier_forward(const Vector& z, const ClassifierParams& params) {
  if (z.size() != params.dim()) {
    std::ostringstream os;
    os << "classifier_forward: descriptor length " << z.size() << " but classifier expects "
       << params.dim();
    throw InvalidArgument(os.str());
  }
  return params.weights * z + params.bias;
}

HeadOutput head_forward(const Matrix& x, const HeadConfig& cfg, const ClassifierParams& params) {
  if (params.dim() != descriptor_dim(cfg.variant, x.cols())) {
    std::ostringstream os;
    os << "head_forward: classifier width " << params.dim() << " but " << cfg.variant.label()
       << " on C = " << x.cols() << " produces " << descriptor_dim(cfg.variant, x.cols());
    throw InvalidArgument(os.str());
  }
  Descriptor d = describe_forward(x, cfg);
  HeadOutput out;
  out.logits = classifier_forward(d.z, params);
  out.tape.descriptor = std::move(d.tape);
  out.tape.z = std::move(d.z);
  out.tape.params_version = params.version;
  return out;
}

HeadGradients HeadGradients::zeros_like(const ClassifierParams& params) {
  HeadGradients g;
  g.weights = Matrix::Zero(params.weights.rows(), params.weights.cols());
  g.bias = Vector::Zero(params.bias.size());
  return g;
}

HeadGradients& HeadGradients::operator+=(const HeadGradients& other) {
  weights += other.weights;
  bias += other.bias;
  return *this;
}

HeadGradients classifier_backward(const Vector& grad_logits, const Vector& z) {
  HeadGradients g;
  g.weights = grad_logits * z.transpose();
  g.bias = grad_logits;
  return g;
}

HeadGradients head_backward(const Vector& grad_logits, HeadTape& tape, const HeadConfig& cfg,
                            const ClassifierParams& params, bool want_input) {
  if (tape.consumed) throw StaleTapeError("head_backward: tape was already consumed");
  if (tape.params_version != params.version) {
    std::ostringstream os;
    os << "head_backward: tape recorded parameter version " << tape.params_version
       << " but parameters are at version " << params.version;
    throw StaleTapeError(os.str());
  }
  if (grad_logits.size() != params.classes()) {
    throw InvalidArgument("head_backward: logit gradient length does not match class count");
  }
  tape.consumed = true;

  HeadGradients g = classifier_backward(grad_logits, tape.z);
  if (want_input) {
    const Vector grad_z = params.weights.transpose() * grad_logits;
    g.input = describe_backward(grad_z, tape.descriptor, cfg);
  }
  return g;
}

LossResult loss_softmax_ce(const Vector& logits, Index label) {
  if (logits.size() < 2) throw InvalidArgument("loss_softmax_ce: need at least two classes");
  if (label < 0 || label >= logits.size()) {
    std::ostringstream os;
    os << "loss_softmax_ce: label " << label << " out of range [0, " << logits.size() << ")";
    throw InvalidArgument(os.str());
  }
  const double peak = logits.maxCoeff();
  const Vector shifted = logits.array() - peak;
  const Vector expd = shifted.array().exp();
  const double total = expd.sum();
  LossResult out;
  out.loss = std::log(total) - shifted(label);
  out.grad_logits = expd / total;
  out.grad_logits(label) -= 1.0;
  return out;
}

void OptimState::reset(const ClassifierParams& params) {
  velocity_weights = Matrix::Zero(params.weights.rows(), params.weights.cols());
  velocity_bias = Vector::Zero(params.bias.size());
}

void OptimState::validate() const {
  if (!(clip_lo < clip_hi)) throw InvalidArgument("OptimState: clip_lo must be < clip_hi");
  if (!(lr > 0.0)) throw InvalidArgument("OptimState: lr must be positive");
  if (momentum < 0.0 || weight_decay < 0.0) {
    throw InvalidArgument("OptimState: momentum and weight_decay must be non-negative");
  }
}

namespace {

template <typename Param, typename Grad, typename Vel>
void update_block(Param& w, const Grad& g, Vel& v, const OptimState& s) {
  for (Index i = 0; i < w.size(); ++i) {
    const double clipped = std::clamp(g.data()[i], s.clip_lo, s.clip_hi);
    v.data()[i] = s.momentum * v.data()[i] + clipped + s.weight_decay * w.data()[i];
    w.data()[i] -= s.lr * v.data()[i];
  }
}

}  // namespace

void sgd_step(ClassifierParams& params, const HeadGradients& grads, OptimState& state) {
  state.validate();
  if (grads.weights.rows() != params.weights.rows() ||
      grads.weights.cols() != params.weights.cols() || grads.bias.size() != params.bias.size()) {
    throw InvalidArgument("sgd_step: gradient shapes do not match parameters");
  }
  if (state.velocity_weights.rows() != params.weights.rows() ||
      state.velocity_weights.cols() != params.weights.cols() ||
      state.velocity_bias.size() != params.bias.size()) {
    throw InvalidArgument("sgd_step: optimizer buffers do not match parameters; call reset()");
  }
  update_block(params.weights, grads.weights, state.velocity_weights, state);
  update_block(params.bias, grads.bias, state.velocity_bias, state);
  ++params.version;
}

}  // namespace monet
