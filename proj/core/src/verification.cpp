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

#include "monet/verification.hpp"

#include <Eigen/QR>

#include <cmath>
#include <sstream>

#include "monet/moment_layers.hpp"
#include "monet/pooling.hpp"

namespace monet {

Matrix random_normal(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

Matrix random_uniform(Index rows, Index cols, double lo, double hi, Rng& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

Matrix random_orthonormal(Index rows, Index cols, Rng& rng) {
  if (rows < cols) throw InvalidArgument("random_orthonormal: need rows >= cols");
  const Eigen::MatrixXd g = random_normal(rows, cols, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    if (qr.matrixQR()(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Matrix with_singular_values(Index rows, Index cols, const Vector& singular, Rng& rng) {
  const Index k = std::min(rows, cols);
  if (singular.size() != k) throw InvalidArgument("with_singular_values: need min(rows, cols) values");
  const Matrix u = random_orthonormal(rows, k, rng);
  const Matrix v = random_orthonormal(cols, k, rng);
  return u * singular.asDiagonal() * v.transpose();
}

Matrix sqrtm_oracle(const Matrix& m) {
  const EigResult eig = eigh(m);
  Vector root(eig.values.size());
  for (Index i = 0; i < eig.values.size(); ++i) {
    const double lambda = eig.values(i);
    if (lambda < -1e-10) {
      std::ostringstream os;
      os << "sqrtm_oracle: eigenvalue " << lambda << " is materially negative";
      throw InvalidArgument(os.str());
    }
    root(i) = std::sqrt(std::max(lambda, 0.0));
  }
  Matrix r = eig.vectors * root.asDiagonal() * eig.vectors.transpose();
  return 0.5 * (r + r.transpose());
}

GradCheckReport gradcheck(const std::string& op, const ScalarFn& f, const Vector& analytic,
                          const Vector& point, double step, double tolerance) {
  if (analytic.size() != point.size()) {
    throw InvalidArgument("gradcheck(" + op + "): analytic gradient length mismatch");
  }
  GradCheckReport rep;
  rep.op = op;
  rep.step = step;
  rep.tolerance = tolerance;
  Vector probe = point;
  for (Index i = 0; i < point.size(); ++i) {
    probe(i) = point(i) + step;
    const double up = f(probe);
    probe(i) = point(i) - step;
    const double down = f(probe);
    probe(i) = point(i);
    if (!std::isfinite(up) || !std::isfinite(down)) {
      std::ostringstream os;
      os << "gradcheck(" << op << "): non-finite value when probing coordinate " << i;
      throw Error(os.str());
    }
    const double numeric = (up - down) / (2.0 * step);
    const double abs_err = std::abs(numeric - analytic(i));
    const double denom = std::max({std::abs(analytic(i)), std::abs(numeric), kRelErrFloor});
    const double rel_err = abs_err / denom;
    rep.max_abs_err = std::max(rep.max_abs_err, abs_err);
    if (rel_err > rep.max_rel_err || rep.worst_index < 0) {
      rep.max_rel_err = std::max(rep.max_rel_err, rel_err);
      rep.worst_index = i;
    }
  }
  rep.pass = rep.max_rel_err <= tolerance;
  return rep;
}

Vector flatten(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unflatten(const Vector& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw InvalidArgument("unflatten: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

GaussianBlocks gaussian_blocks(const Matrix& x) {
  if (x.rows() < 1 || x.cols() < 1) throw InvalidArgument("gaussian_blocks: empty input");
  const double n = static_cast<double>(x.rows());
  GaussianBlocks b;
  b.mean = x.colwise().sum().transpose() / n;
  b.second_moment = (x.transpose() * x) / n;
  b.covariance = b.second_moment - b.mean * b.mean.transpose();
  return b;
}

Matrix moment_matrix(const GaussianBlocks& blocks) {
  const Index c = blocks.mean.size();
  Matrix m(c + 1, c + 1);
  m(0, 0) = 1.0;
  m.block(0, 1, 1, c) = blocks.mean.transpose();
  m.block(1, 0, c, 1) = blocks.mean;
  m.block(1, 1, c, c) = blocks.second_moment;
  return m;
}

bool verify_eq2(const Matrix& x, double tol) {
  const Matrix xt = hm_forward(x).matrix;
  const Matrix product = xt.transpose() * xt;
  const Matrix expected = moment_matrix(gaussian_blocks(x));
  return (product - expected).cwiseAbs().maxCoeff() <= tol;
}

SketchQuality sketch_quality(const Vector& x, const Vector& y, Index d_out, Index trials,
                             Rng& rng) {
  if (trials < 1) throw InvalidArgument("sketch_quality: trials must be >= 1");
  if (x.size() != y.size() || x.size() < 1) {
    throw InvalidArgument("sketch_quality: x and y must be non-empty and equal length");
  }
  SketchQuality q;
  q.trials = trials;
  q.target = x.dot(y) * x.dot(y);
  q.absolute = q.target < 1e-12;
  const double scale = q.absolute ? 1.0 : q.target;

  std::vector<double> estimates(static_cast<std::size_t>(trials));
  for (auto& est : estimates) {
    const SketchParams params = SketchParams::generate(x.size(), d_out, rng.next_u64());
    est = ts_forward({x.data(), static_cast<std::size_t>(x.size())}, params)
              .dot(ts_forward({y.data(), static_cast<std::size_t>(y.size())}, params));
  }
  double sum = 0.0;
  double err_sum = 0.0;
  for (double est : estimates) {
    sum += est;
    err_sum += std::abs(est - q.target) / scale;
  }
  q.mean_estimate = sum / static_cast<double>(trials);
  q.mean_error = err_sum / static_cast<double>(trials);
  q.bias = std::abs(q.mean_estimate - q.target) / scale;
  if (trials > 1) {
    double ss = 0.0;
    for (double est : estimates) ss += (est - q.mean_estimate) * (est - q.mean_estimate);
    q.std_dev = std::sqrt(ss / static_cast<double>(trials - 1));
  }
  q.std_error = q.std_dev / std::sqrt(static_cast<double>(trials));
  return q;
}

SketchQuality sketch_quality(Index d_in, Index d_out, Index trials, Rng& rng) {
  Rng data = rng.split(0);
  Vector x(d_in);
  Vector y(d_in);
  for (Index i = 0; i < d_in; ++i) x(i) = data.normal();
  for (Index i = 0; i < d_in; ++i) y(i) = x(i) + 0.5 * data.normal();
  return sketch_quality(x, y, d_out, trials, rng);
}

}  // namespace monet
