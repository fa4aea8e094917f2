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

#include "monet/numkernel.hpp"

namespace monet {

/// Guards for the element-wise signed square root and l2 normalization.
struct NormConfig {
  double sqrt_guard = 1e-8;  // floor on sqrt|v| in the signed-sqrt derivative
  double l2_guard = 1e-12;   // vectors with smaller norm map to zero

  void validate() const;
};

/// sign(v) * sqrt(|v|), element-wise.
Vector signed_sqrt_forward(const Vector& v);
Vector signed_sqrt_backward(const Vector& grad_out, const Vector& v, const NormConfig& cfg = {});

/// v / ||v||, or the zero vector when ||v|| <= cfg.l2_guard.
Vector l2_normalize_forward(const Vector& v, const NormConfig& cfg = {});
/// (I - u u^T) grad_out / ||v|| with u = v / ||v||; zero on the guard path.
Vector l2_normalize_backward(const Vector& grad_out, const Vector& v, const NormConfig& cfg = {});

/// Element-wise signed square root of a feature map (location preprocessing).
Matrix signed_sqrt_features(const Matrix& x);

}  // namespace monet
