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

#include <string>

#include "monet/numkernel.hpp"

namespace monet {

/// Singular-value retention threshold for the sub-matrix square root.
inline constexpr double kDefaultEpsilon = 1e-5;
/// Minimum |s_i^2 - s_j^2| tolerated between retained singular values.
inline constexpr double kSeparationGuard = 1e-8;

/// X~ = (1/sqrt(n)) [1 | X] for an n x C feature map X. The product X~^T X~
/// is the moment matrix [[1, mu], [mu^T, X^T X / n]].
struct HomogeneousFeatures {
  Matrix matrix;  // n x (C + 1)
  Index n = 0;
  Index c = 0;
};

HomogeneousFeatures hm_forward(const Matrix& x);

/// Adjoint of hm_forward: drops the gradient of the constant column and
/// scales by 1/sqrt(n).
Matrix hm_backward(const Matrix& grad_xt);

/// (1/sqrt(n)) X, the pre-pooling map used when the homogeneous padding is
/// disabled, and its adjoint.
Matrix scale_forward(const Matrix& x);
Matrix scale_backward(const Matrix& grad);

/// Factors kept from ssqrt_forward for the paired backward call. Only the
/// e retained singular triplets are stored; the rest of U is never formed.
struct SvdCache {
  Matrix u1;  // n x e
  Vector s;   // e, each > epsilon, non-increasing
  Matrix v1;  // m x e
  Index e = 0;
  double epsilon = kDefaultEpsilon;
};

struct SsqrtResult {
  Matrix y;  // n x m; rows [0, e) hold diag(sqrt(s)) v1^T, the rest are zero
  SvdCache cache;
};

/// Sub-matrix square root: Y with Y^T Y = (X~^T X~)^(1/2) over the retained
/// spectrum. Requires n >= m and at least one singular value above epsilon.
SsqrtResult ssqrt_forward(const Matrix& xt, double epsilon = kDefaultEpsilon);
inline SsqrtResult ssqrt_forward(const HomogeneousFeatures& xt,
                                 double epsilon = kDefaultEpsilon) {
  return ssqrt_forward(xt.matrix, epsilon);
}

/// How ssqrt_backward treats nearly repeated retained singular values.
enum class GuardMode {
  kVerify,  // throw SeparationError
  kTrain,   // clamp the denominator to +/- the guard
};

/// Raised by ssqrt_backward in kVerify mode when two retained singular values
/// are too close for the 1/(s_i^2 - s_j^2) coupling to be meaningful.
class SeparationError : public Error {
 public:
  SeparationError(Index i, Index j, double si, double sj);
  Index first() const { return i_; }
  Index second() const { return j_; }

 private:
  Index i_;
  Index j_;
};

/// Gradient of the loss w.r.t. X~ given dL/dY, with dL/dU = 0:
///
///   dL/dX~ = U1 ( diag(dL/dS) + 2 S [K^T o (V1^T dL/dV)]_sym ) V1^T
///            + U1 S^-1 (dL/dV)^T (I - V1 V1^T)
///
/// where dL/dS_i = (1/2) s_i^(-1/2) (dY_i . v_i), dL/dV = dY1^T S^(1/2),
/// K_ij = 1/(s_i^2 - s_j^2) off the diagonal and [Q]_sym = (Q + Q^T)/2.
/// The last term only matters when e < m (rank-deficient input); it is zero
/// for full-rank X~.
Matrix ssqrt_backward(const Matrix& grad_y, const SvdCache& cache,
                      GuardMode mode = GuardMode::kVerify,
                      double separation_guard = kSeparationGuard);

}  // namespace monet
