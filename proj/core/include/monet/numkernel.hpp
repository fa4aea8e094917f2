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

#include <Eigen/Core>

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "monet/error.hpp"

namespace monet {

// Row-major double storage for every feature, moment and gradient block.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using Complex = std::complex<double>;

/// Thin singular value decomposition a = u * diag(s) * v^T of an n x m matrix,
/// k = min(n, m). Columns of u and v are orthonormal; s is non-increasing.
struct SvdResult {
  Matrix u;  // n x k
  Vector s;  // k
  Matrix v;  // m x k
};

/// Raised when a decomposition fails to reach its accuracy target.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error(what) {}
};

/// Thin SVD. Each column pair (u_i, v_i) is sign-normalized so that the
/// largest-magnitude entry of v_i is positive, which makes every derived
/// quantity deterministic. Ties in s keep the column order of the solver.
SvdResult svd_thin(const Matrix& a);

struct EigResult {
  Vector values;   // non-increasing
  Matrix vectors;  // columns are orthonormal eigenvectors
};

/// Symmetric eigendecomposition a = W diag(lambda) W^T.
/// Throws InvalidArgument when a is not symmetric within 1e-12 absolute.
EigResult eigh(const Matrix& a);

/// Forward DFT of a real sequence, X_k = sum_t x_t exp(-2 pi i k t / D).
/// Any length D >= 1; powers of two use an in-place radix-2 path, other
/// lengths go through Bluestein's chirp-z transform.
std::vector<Complex> fft_real(std::span<const double> x);

/// Inverse of fft_real (scaled by 1/D); imaginary residue is discarded.
std::vector<double> ifft_real(std::span<const Complex> spectrum);

/// Complex forward/inverse transforms backing the real pair. The inverse is
/// unscaled so callers control where the 1/D factor lands.
void fft_inplace(std::vector<Complex>& data, bool inverse);

bool all_finite(const Matrix& m);
bool all_finite(const Vector& v);

/// Throws InvalidArgument naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

/// Relative Frobenius distance ||a - b|| / max(||b||, tiny).
double relative_frobenius(const Matrix& a, const Matrix& b);

std::string shape_string(const Matrix& m);

}  // namespace monet
