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
#include <optional>
#include <string>
#include <vector>

#include "monet/moment_layers.hpp"
#include "monet/norm_layers.hpp"
#include "monet/pooling.hpp"

namespace monet {

inline constexpr Index kDefaultSketchDim = 10000;

/// Which layers are present in the head.
///
///   monet    : homogeneous mapping + sub-matrix square root
///   monet-2  : sub-matrix square root only (2nd-order moments)
///   monet-u  : homogeneous mapping only (unnormalized)
///   monet-2u : neither (plain bilinear pooling of X / sqrt(n))
struct VariantSpec {
  bool use_hm = true;
  bool use_ssqrt = true;
  PoolingKind pooling = PoolingKind::kBilinear;
  Index sketch_dim = kDefaultSketchDim;

  static VariantSpec from_name(const std::string& name,
                               PoolingKind pooling = PoolingKind::kBilinear,
                               Index sketch_dim = kDefaultSketchDim);
  /// One of monet, monet-2, monet-u, monet-2u.
  std::string name() const;
  /// name() plus the pooling suffix, e.g. "monet-2/ts".
  std::string label() const;

  friend bool operator==(const VariantSpec&, const VariantSpec&) = default;
};

/// All four variants crossed with both poolings.
std::vector<VariantSpec> variant_grid(Index sketch_dim);

/// Width of the matrix handed to pooling: C + 1 with the homogeneous
/// mapping, C without.
Index pooled_width(const VariantSpec& spec, Index channels);
/// (C+1)^2 or C^2 for bilinear pooling, D for Tensor Sketch.
Index descriptor_dim(const VariantSpec& spec, Index channels);

/// Everything apart from the classifier that determines the head's output.
struct HeadConfig {
  VariantSpec variant;
  NormConfig norm;
  double epsilon = kDefaultEpsilon;
  GuardMode guard = GuardMode::kTrain;
  bool preprocess_signed_sqrt = false;
  std::optional<SketchParams> sketch;

  /// Builds a config, drawing sketch tables from sketch_seed when the
  /// variant uses Tensor Sketch pooling.
  static HeadConfig make(const VariantSpec& variant, Index channels, std::uint64_t sketch_seed);

  /// Throws InvalidArgument describing the first inconsistency.
  void validate(Index channels) const;
};

/// Intermediates of the parameter-free part of the head.
struct DescriptorTape {
  Index n = 0;
  Index c = 0;
  std::vector<Index> order;     // canonical row order applied to the input
  Matrix preprocessed;          // rows in canonical order, after optional signed sqrt
  std::optional<SvdCache> svd;  // present when use_ssqrt
  Matrix pool_input;            // Y (or X~ when ssqrt is off)
  Vector pooled;                // raw pooled descriptor
  Vector rooted;                // after signed square root
};

struct Descriptor {
  Vector z;  // pooled, signed-sqrt'd and l2-normalized
  DescriptorTape tape;
};

/// Rows are first sorted lexicographically, so the descriptor depends only
/// on the multiset of locations and is bitwise invariant to their order.
Descriptor describe_forward(const Matrix& x, const HeadConfig& cfg);
/// Gradient w.r.t. the input feature map (in the caller's row order).
Matrix describe_backward(const Vector& grad_z, const DescriptorTape& tape, const HeadConfig& cfg);

/// Linear classifier logits = W z + b.
struct ClassifierParams {
  Matrix weights;  // k x dim
  Vector bias;     // k
  /// Bumped by every sgd_step; tapes remember the version they saw.
  std::uint64_t version = 0;

  static ClassifierParams zeros(Index classes, Index dim);
  Index classes() const { return weights.rows(); }
  Index dim() const { return weights.cols(); }
};

Vector classifier_forward(const Vector& z, const ClassifierParams& params);

struct HeadTape {
  DescriptorTape descriptor;
  Vector z;
  std::uint64_t params_version = 0;
  bool consumed = false;
};

struct HeadOutput {
  Vector logits;
  HeadTape tape;
};

HeadOutput head_forward(const Matrix& x, const HeadConfig& cfg, const ClassifierParams& params);

struct HeadGradients {
  Matrix weights;
  Vector bias;
  std::optional<Matrix> input;

  static HeadGradients zeros_like(const ClassifierParams& params);
  HeadGradients& operator+=(const HeadGradients& other);
};

/// Classifier gradients for a known descriptor: dW = g z^T, db = g.
HeadGradients classifier_backward(const Vector& grad_logits, const Vector& z);

/// Raised when a tape is replayed or belongs to an older parameter version.
class StaleTapeError : public Error {
 public:
  explicit StaleTapeError(const std::string& what) : Error(what) {}
};

/// Back-propagates through the classifier and, when want_input is set,
/// through the whole descriptor pipeline. Marks the tape consumed.
HeadGradients head_backward(const Vector& grad_logits, HeadTape& tape, const HeadConfig& cfg,
                            const ClassifierParams& params, bool want_input = false);

struct LossResult {
  double loss = 0.0;
  Vector grad_logits;
};

/// Softmax cross-entropy with max subtraction.
LossResult loss_softmax_ce(const Vector& logits, Index label);

/// SGD with momentum, weight decay and element-wise gradient clipping:
///   g' = clamp(g, clip_lo, clip_hi); v' = momentum v + g' + wd w; w' = w - lr v'.
struct OptimState {
  double lr = 1e-3;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  double clip_lo = -1.0;
  double clip_hi = 1.0;
  Matrix velocity_weights;
  Vector velocity_bias;

  /// Zero velocity buffers shaped like params.
  void reset(const ClassifierParams& params);
  void validate() const;
};

void sgd_step(ClassifierParams& params, const HeadGradients& grads, OptimState& state);

}  // namespace monet
