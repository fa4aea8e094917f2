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

#include "monet/numkernel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace monet {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kSvdResidualTol = 1e-9;

// Flip (u_i, v_i) so the largest-magnitude entry of v_i is positive. The
// first index wins on exact magnitude ties.
void normalize_signs(Matrix& u, Matrix& v) {
  for (Index j = 0; j < v.cols(); ++j) {
    Index best = 0;
    double best_abs = -1.0;
    for (Index i = 0; i < v.rows(); ++i) {
      const double a = std::abs(v(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (v(best, j) < 0.0) {
      v.col(j) = -v.col(j);
      u.col(j) = -u.col(j);
    }
  }
}

}  // namespace

std::string shape_string(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }
bool all_finite(const Vector& v) { return v.allFinite(); }

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidArgument(std::string(what) + ": non-finite entry in " + shape_string(m) +
                          " matrix");
  }
}

double relative_frobenius(const Matrix& a, const Matrix& b) {
  const double denom = std::max(b.norm(), 1e-300);
  return (a - b).norm() / denom;
}

SvdResult svd_thin(const Matrix& a) {
  if (a.rows() < 1 || a.cols() < 1) {
    throw InvalidArgument("svd_thin: empty matrix " + shape_string(a));
  }
  require_finite(a, "svd_thin");

  Eigen::JacobiSVD<Eigen::MatrixXd> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out{solver.matrixU(), solver.singularValues(), solver.matrixV()};
  normalize_signs(out.u, out.v);

  const Matrix rebuilt = out.u * out.s.asDiagonal() * out.v.transpose();
  const double scale = std::max(a.norm(), 1e-300);
  const double residual = (rebuilt - a).norm() / scale;
  if (!(residual <= kSvdResidualTol) || !out.s.allFinite()) {
    std::ostringstream os;
    os << "svd_thin: did not converge on " << shape_string(a)
       << " input (relative residual " << residual << ")";
    throw ConvergenceError(os.str());
  }
  return out;
}

EigResult eigh(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw InvalidArgument("eigh: expected a non-empty square matrix, got " + shape_string(a));
  }
  require_finite(a, "eigh");
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol) {
    std::ostringstream os;
    os << "eigh: matrix is not symmetric (max |a - a^T| = " << asym << ")";
    throw InvalidArgument(os.str());
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("eigh: solver failed on " + shape_string(a) + " input");
  }
  // Eigen returns ascending order.
  const Index k = a.rows();
  EigResult out{Vector(k), Matrix(k, k)};
  for (Index i = 0; i < k; ++i) {
    out.values(i) = solver.eigenvalues()(k - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(k - 1 - i);
  }
  return out;
}

}  // namespace monet
