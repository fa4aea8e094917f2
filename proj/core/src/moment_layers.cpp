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

#include "monet/moment_layers.hpp"

#include <cmath>
#include <sstream>

namespace monet {

namespace {

void check_feature_map(const Matrix& x, const char* op) {
  if (x.rows() < 1 || x.cols() < 1) {
    throw InvalidArgument(std::string(op) + ": empty feature map " + shape_string(x));
  }
  require_finite(x, op);
}

}  // namespace

HomogeneousFeatures hm_forward(const Matrix& x) {
  check_feature_map(x, "hm_forward");
  const Index n = x.rows();
  const Index c = x.cols();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  HomogeneousFeatures out;
  out.n = n;
  out.c = c;
  out.matrix.resize(n, c + 1);
  out.matrix.col(0).setConstant(scale);
  out.matrix.rightCols(c) = scale * x;
  return out;
}

Matrix hm_backward(const Matrix& grad_xt) {
  if (grad_xt.rows() < 1 || grad_xt.cols() < 2) {
    throw InvalidArgument("hm_backward: expected n x (C+1) gradient with C >= 1, got " +
                          shape_string(grad_xt));
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(grad_xt.rows()));
  return scale * grad_xt.rightCols(grad_xt.cols() - 1);
}

Matrix scale_forward(const Matrix& x) {
  check_feature_map(x, "scale_forward");
  return x / std::sqrt(static_cast<double>(x.rows()));
}

Matrix scale_backward(const Matrix& grad) {
  if (grad.rows() < 1) throw InvalidArgument("scale_backward: empty gradient");
  return grad / std::sqrt(static_cast<double>(grad.rows()));
}

SsqrtResult ssqrt_forward(const Matrix& xt, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("ssqrt_forward: epsilon must be positive");
  if (xt.rows() < 1 || xt.cols() < 1) {
    throw InvalidArgument("ssqrt_forward: empty input " + shape_string(xt));
  }
  if (xt.rows() < xt.cols()) {
    std::ostringstream os;
    os << "ssqrt_forward: need at least as many locations as columns (n = " << xt.rows()
       << " < " << xt.cols() << "); supply more locations";
    throw InvalidArgument(os.str());
  }
  require_finite(xt, "ssqrt_forward");

  const SvdResult svd = svd_thin(xt);
  Index e = 0;
  while (e < svd.s.size() && svd.s(e) > epsilon) ++e;
  if (e == 0) {
    std::ostringstream os;
    os << "ssqrt_forward: every singular value is <= epsilon (" << epsilon
       << "); the input is numerically zero";
    throw InvalidArgument(os.str());
  }

  SsqrtResult out;
  out.cache.u1 = svd.u.leftCols(e);
  out.cache.s = svd.s.head(e);
  out.cache.v1 = svd.v.leftCols(e);
  out.cache.e = e;
  out.cache.epsilon = epsilon;

  out.y = Matrix::Zero(xt.rows(), xt.cols());
  for (Index i = 0; i < e; ++i) {
    out.y.row(i) = std::sqrt(out.cache.s(i)) * out.cache.v1.col(i).transpose();
  }
  return out;
}

SeparationError::SeparationError(Index i, Index j, double si, double sj)
    : Error([&] {
        std::ostringstream os;
        os << "ssqrt_backward: singular values " << i << " (" << si << ") and " << j << " ("
           << sj << ") are not separated; K is undefined";
        return os.str();
      }()),
      i_(i),
      j_(j) {}

Matrix ssqrt_backward(const Matrix& grad_y, const SvdCache& cache, GuardMode mode,
                      double separation_guard) {
  const Index n = cache.u1.rows();
  const Index m = cache.v1.rows();
  const Index e = cache.e;
  if (grad_y.rows() != n || grad_y.cols() != m) {
    std::ostringstream os;
    os << "ssqrt_backward: gradient is " << shape_string(grad_y) << " but the cache expects "
       << n << "x" << m;
    throw InvalidArgument(os.str());
  }
  if (e < 1 || cache.s.size() != e || cache.u1.cols() != e || cache.v1.cols() != e) {
    throw InvalidArgument("ssqrt_backward: inconsistent SvdCache");
  }
  require_finite(grad_y, "ssqrt_backward");

  const Vector& s = cache.s;
  const Vector sqrt_s = s.cwiseSqrt();
  const Matrix grad_y1 = grad_y.topRows(e);  // rows beyond e do not depend on X~

  // dL/dS (diagonal) and dL/dV = dY1^T S^(1/2).
  const Matrix gv = grad_y1 * cache.v1;  // e x e
  Vector grad_s(e);
  for (Index i = 0; i < e; ++i) grad_s(i) = 0.5 * gv(i, i) / sqrt_s(i);
  const Matrix grad_v = grad_y1.transpose() * sqrt_s.asDiagonal();  // m x e

  Matrix k_matrix = Matrix::Zero(e, e);
  for (Index i = 0; i < e; ++i) {
    for (Index j = 0; j < e; ++j) {
      if (i == j) continue;
      double gap = s(i) * s(i) - s(j) * s(j);
      if (std::abs(gap) < separation_guard) {
        if (mode == GuardMode::kVerify) throw SeparationError(std::min(i, j), std::max(i, j), s(i), s(j));
        // Ties have no defined sign; order by index.
        gap = (gap > 0.0 || (gap == 0.0 && i < j)) ? separation_guard : -separation_guard;
      }
      k_matrix(i, j) = 1.0 / gap;
    }
  }

  const Matrix q = k_matrix.transpose().cwiseProduct(cache.v1.transpose() * grad_v);
  const Matrix q_sym = 0.5 * (q + q.transpose());
  Matrix inner = 2.0 * s.asDiagonal() * q_sym;
  inner.diagonal() += grad_s;

  Matrix grad_xt = cache.u1 * inner * cache.v1.transpose();
  if (e < m) {
    // Component of dL/dV orthogonal to the retained right subspace.
    const Matrix grad_v_t = grad_v.transpose();  // e x m
    const Matrix outside = grad_v_t - (grad_v_t * cache.v1) * cache.v1.transpose();
    grad_xt += cache.u1 * s.cwiseInverse().asDiagonal() * outside;
  }
  return grad_xt;
}

}  // namespace monet
