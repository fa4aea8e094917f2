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
#include <span>
#include <string>
#include <vector>

#include "monet/numkernel.hpp"

namespace monet {

enum class PoolingKind { kBilinear, kSketch };

std::string to_string(PoolingKind kind);
/// Accepts "bilinear" and "ts" (or "sketch").
PoolingKind parse_pooling(const std::string& name);

/// Flattened pooled representation: (m * m) values for bilinear pooling,
/// D values for Tensor Sketch pooling.
struct PooledDescriptor {
  Vector values;
  PoolingKind kind = PoolingKind::kBilinear;

  Index dim() const { return values.size(); }
};

/// Row-major flattening of Y^T Y = sum_i y_i y_i^T. Each entry is accumulated
/// over rows in order and mirrored, so the result is exactly symmetric.
PooledDescriptor bilinear_pool_forward(const Matrix& y);

/// Adjoint of bilinear_pool_forward: Y (G + G^T) with G = reshape(grad_m).
Matrix bilinear_pool_backward(const Vector& grad_m, const Matrix& y);

/// Fixed random hash and sign tables of a Tensor Sketch projection from
/// d_in to d_out dimensions. Hash entries are uniform over [0, d_out) and
/// signs uniform over {-1, +1}.
class SketchParams {
 public:
  /// Draws all four tables from a generator seeded with `seed`.
  static SketchParams generate(Index d_in, Index d_out, std::uint64_t seed);

  /// Rebuilds from stored tables (e.g. a model file); validates ranges.
  SketchParams(Index d_out, std::uint64_t seed, std::vector<std::int64_t> h1,
               std::vector<std::int64_t> h2, std::vector<int> s1, std::vector<int> s2);

  Index d_in() const { return static_cast<Index>(h1_.size()); }
  Index d_out() const { return d_out_; }
  std::uint64_t seed() const { return seed_; }

  /// table is 1 or 2.
  std::span<const std::int64_t> hash(int table) const;
  std::span<const int> signs(int table) const;

  /// True when bin t of a Tensor Sketch depends on the input. A bin is
  /// identically zero when no pair (i, j) has h1(i) + h2(j) = t (mod d_out), or
  /// when the only pairs landing there are (i, j) and (j, i) with opposite
  /// sign products, so the x_i x_j coefficient cancels.
  bool active_bin(Index t) const { return support_[static_cast<std::size_t>(t)] != 0; }

  friend bool operator==(const SketchParams&, const SketchParams&) = default;

 private:
  Index d_out_;
  std::uint64_t seed_;
  std::vector<std::int64_t> h1_;
  std::vector<std::int64_t> h2_;
  std::vector<int> s1_;
  std::vector<int> s2_;
  std::vector<char> support_;
};

/// psi_j(x) = sum over i with h_t(i) = j of s_t(i) x_i.
Vector count_sketch(std::span<const double> x, int table, const SketchParams& params);

/// Circular convolution of the two count sketches, computed spectrally.
/// Inactive bins are set to exactly zero instead of FFT round-off.
Vector ts_forward(std::span<const double> x, const SketchParams& params);

/// Sum of ts_forward over the rows of y. Spectra are accumulated row by row
/// and inverted once; rows that are entirely zero contribute nothing and are
/// skipped.
PooledDescriptor ts_pool_forward(const Matrix& y, const SketchParams& params);

/// Adjoint of ts_pool_forward. For each row, the gradient reaching one count
/// sketch is the circular cross-correlation of grad_out with the other
/// sketch; it is then pulled back through the count-sketch transpose.
Matrix ts_pool_backward(const Vector& grad_out, const Matrix& y, const SketchParams& params);

}  // namespace monet
