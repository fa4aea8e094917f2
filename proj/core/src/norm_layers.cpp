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

#include "monet/norm_layers.hpp"

#include <cmath>

namespace monet {

namespace {

inline double signed_sqrt(double v) {
  if (v > 0.0) return std::sqrt(v);
  if (v < 0.0) return -std::sqrt(-v);
  return 0.0;
}

void check_same_size(const Vector& a, const Vector& b, const char* op) {
  if (a.size() != b.size()) {
    throw InvalidArgument(std::string(op) + ": gradient and input lengths differ");
  }
}

}  // namespace

void NormConfig::validate() const {
  if (!(sqrt_guard > 0.0) || !(l2_guard > 0.0)) {
    throw InvalidArgument("NormConfig: guards must be positive");
  }
}

Vector signed_sqrt_forward(const Vector& v) { return v.unaryExpr(&signed_sqrt); }

Vector signed_sqrt_backward(const Vector& grad_out, const Vector& v, const NormConfig& cfg) {
  check_same_size(grad_out, v, "signed_sqrt_backward");
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    out(i) = grad_out(i) / (2.0 * std::max(std::sqrt(std::abs(v(i))), cfg.sqrt_guard));
  }
  return out;
}

Vector l2_normalize_forward(const Vector& v, const NormConfig& cfg) {
  const double norm = v.norm();
  if (!(norm > cfg.l2_guard)) return Vector::Zero(v.size());
  return v / norm;
}

Vector l2_normalize_backward(const Vector& grad_out, const Vector& v, const NormConfig& cfg) {
  check_same_size(grad_out, v, "l2_normalize_backward");
  const double norm = v.norm();
  if (!(norm > cfg.l2_guard)) return Vector::Zero(v.size());
  const Vector u = v / norm;
  return (grad_out - grad_out.dot(u) * u) / norm;
}

Matrix signed_sqrt_features(const Matrix& x) { return x.unaryExpr(&signed_sqrt); }

}  // namespace monet
