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

#include <functional>
#include <string>

#include "monet/numkernel.hpp"
#include "monet/rng.hpp"

namespace monet {

/// Matrix of independent standard normals.
Matrix random_normal(Index rows, Index cols, Rng& rng);
/// Matrix of independent uniforms on [lo, hi).
Matrix random_uniform(Index rows, Index cols, double lo, double hi, Rng& rng);
/// Haar-like random matrix with orthonormal columns (rows >= cols).
Matrix random_orthonormal(Index rows, Index cols, Rng& rng);
/// rows x cols matrix U diag(singular) V^T with random orthonormal U, V;
/// singular.size() must equal min(rows, cols).
Matrix with_singular_values(Index rows, Index cols, const Vector& singular, Rng& rng);

/// Principal square root of a symmetric PSD matrix through its
/// eigendecomposition, W diag(sqrt(lambda)) W^T. Eigenvalues in
/// [-1e-10, 0) are treated as zero; anything more negative throws.
Matrix sqrtm_oracle(const Matrix& m);

inline constexpr double kGradStep = 1e-6;
inline constexpr double kRelErrFloor = 1e-8;

struct GradCheckReport {
  std::string op;
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  Index worst_index = -1;
  double step = kGradStep;
  double tolerance = 0.0;
  bool pass = false;
};

using ScalarFn = std::function<double(const Vector&)>;

/// Compares `analytic` with central differences (f(x + h e_i) - f(x - h e_i)) / 2h
/// on every coordinate of `point`. Relative error per coordinate is
/// |a - n| / max(|a|, |n|, 1e-8). Throws Error naming the coordinate if f is
/// not finite at a probe.
GradCheckReport gradcheck(const std::string& op, const ScalarFn& f, const Vector& analytic,
                          const Vector& point, double step, double tolerance);

/// Convenience overloads flattening matrices row-major.
Vector flatten(const Matrix& m);
Matrix unflatten(const Vector& v, Index rows, Index cols);

/// First and second moments of a feature map.
struct GaussianBlocks {
  Vector mean;           // C
  Matrix second_moment;  // X^T X / n
  Matrix covariance;     // second_moment - mean mean^T
};

GaussianBlocks gaussian_blocks(const Matrix& x);

/// [[1, mu], [mu^T, X^T X / n]] assembled from gaussian_blocks.
Matrix moment_matrix(const GaussianBlocks& blocks);

/// True when hm_forward(x)^T hm_forward(x) matches moment_matrix entrywise
/// within tol.
bool verify_eq2(const Matrix& x, double tol = 1e-12);

struct SketchQuality {
  double target = 0.0;          // <x, y>^2
  double mean_estimate = 0.0;   // mean over trials of <TS(x), TS(y)>
  double bias = 0.0;            // |mean_estimate - target| (relative unless absolute)
  double mean_error = 0.0;      // mean over trials of |estimate - target| (relative unless absolute)
  double std_dev = 0.0;         // sample std of the per-trial estimates
  double std_error = 0.0;       // std_dev / sqrt(trials)
  bool absolute = false;        // target too small for relative errors
  Index trials = 0;
};

/// Monte Carlo over `trials` independent SketchParams draws for fixed x, y.
/// Errors are relative to <x,y>^2 unless it is below 1e-12, in which case
/// they are absolute.
SketchQuality sketch_quality(const Vector& x, const Vector& y, Index d_out, Index trials,
                             Rng& rng);

/// Draws x ~ N(0, I) and y = x + 0.5 n with n ~ N(0, I), then runs the
/// fixed-pair estimator above.
SketchQuality sketch_quality(Index d_in, Index d_out, Index trials, Rng& rng);

}  // namespace monet
