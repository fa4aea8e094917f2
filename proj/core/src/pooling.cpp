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

#include "monet/pooling.hpp"

#include <sstream>

#include "monet/rng.hpp"

namespace monet {

std::string to_string(PoolingKind kind) {
  return kind == PoolingKind::kBilinear ? "bilinear" : "ts";
}

PoolingKind parse_pooling(const std::string& name) {
  if (name == "bilinear") return PoolingKind::kBilinear;
  if (name == "ts" || name == "sketch") return PoolingKind::kSketch;
  throw InvalidArgument("unknown pooling '" + name + "' (expected bilinear or ts)");
}

PooledDescriptor bilinear_pool_forward(const Matrix& y) {
  if (y.rows() < 1 || y.cols() < 1) {
    throw InvalidArgument("bilinear_pool_forward: empty input " + shape_string(y));
  }
  const Index n = y.rows();
  const Index m = y.cols();
  PooledDescriptor out;
  out.kind = PoolingKind::kBilinear;
  out.values = Vector::Zero(m * m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = i; j < m; ++j) {
      double acc = 0.0;
      for (Index r = 0; r < n; ++r) acc += y(r, i) * y(r, j);
      out.values(i * m + j) = acc;
      out.values(j * m + i) = acc;
    }
  }
  return out;
}

Matrix bilinear_pool_backward(const Vector& grad_m, const Matrix& y) {
  const Index m = y.cols();
  if (grad_m.size() != m * m) {
    std::ostringstream os;
    os << "bilinear_pool_backward: gradient has " << grad_m.size() << " entries, expected "
       << m * m;
    throw InvalidArgument(os.str());
  }
  const Eigen::Map<const Matrix> g(grad_m.data(), m, m);
  const Matrix sym = g + g.transpose();
  return y * sym;
}

SketchParams SketchParams::generate(Index d_in, Index d_out, std::uint64_t seed) {
  if (d_in < 1 || d_out < 1) {
    throw InvalidArgument("SketchParams: d_in and d_out must be >= 1");
  }
  const Rng root(seed);
  // One sub-stream per table.
  auto draw_hash = [&](std::uint64_t stream) {
    Rng rng = root.split(stream);
    std::vector<std::int64_t> h(static_cast<std::size_t>(d_in));
    for (auto& v : h) v = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(d_out)));
    return h;
  };
  auto draw_signs = [&](std::uint64_t stream) {
    Rng rng = root.split(stream);
    std::vector<int> s(static_cast<std::size_t>(d_in));
    for (auto& v : s) v = rng.sign();
    return s;
  };
  return SketchParams(d_out, seed, draw_hash(1), draw_hash(2), draw_signs(3), draw_signs(4));
}

SketchParams::SketchParams(Index d_out, std::uint64_t seed, std::vector<std::int64_t> h1,
                           std::vector<std::int64_t> h2, std::vector<int> s1,
                           std::vector<int> s2)
    : d_out_(d_out),
      seed_(seed),
      h1_(std::move(h1)),
      h2_(std::move(h2)),
      s1_(std::move(s1)),
      s2_(std::move(s2)) {
  if (d_out_ < 1 || h1_.empty()) throw InvalidArgument("SketchParams: empty tables");
  if (h2_.size() != h1_.size() || s1_.size() != h1_.size() || s2_.size() != h1_.size()) {
    throw InvalidArgument("SketchParams: table lengths differ");
  }
  for (const auto* h : {&h1_, &h2_}) {
    for (auto v : *h) {
      if (v < 0 || v >= d_out_) throw InvalidArgument("SketchParams: hash entry out of range");
    }
  }
  for (const auto* s : {&s1_, &s2_}) {
    for (auto v : *s) {
      if (v != 1 && v != -1) throw InvalidArgument("SketchParams: sign entry must be +/-1");
    }
  }
  // Coefficient of x_i x_j (i < j) in bin t collects s1(i)s2(j) from pair
  // (i, j) and s1(j)s2(i) from pair (j, i); x_i^2 only comes from (i, i).
  support_.assign(static_cast<std::size_t>(d_out_), 0);
  auto bin = [&](std::size_t a, std::size_t b) {
    return static_cast<std::size_t>((h1_[a] + h2_[b]) % d_out_);
  };
  for (std::size_t i = 0; i < h1_.size(); ++i) {
    support_[bin(i, i)] = 1;
    for (std::size_t j = i + 1; j < h1_.size(); ++j) {
      const std::size_t t1 = bin(i, j);
      const std::size_t t2 = bin(j, i);
      if (t1 != t2) {
        support_[t1] = 1;
        support_[t2] = 1;
      } else if (s1_[i] * s2_[j] + s1_[j] * s2_[i] != 0) {
        support_[t1] = 1;
      }
    }
  }
}

std::span<const std::int64_t> SketchParams::hash(int table) const {
  if (table == 1) return h1_;
  if (table == 2) return h2_;
  throw InvalidArgument("SketchParams: table must be 1 or 2");
}

std::span<const int> SketchParams::signs(int table) const {
  if (table == 1) return s1_;
  if (table == 2) return s2_;
  throw InvalidArgument("SketchParams: table must be 1 or 2");
}

namespace {

void check_row_length(Index got, const SketchParams& params, const char* op) {
  if (got != params.d_in()) {
    std::ostringstream os;
    os << op << ": input dimension " << got << " does not match sketch d_in " << params.d_in();
    throw InvalidArgument(os.str());
  }
}

// Count sketch written straight into a complex buffer ready for the FFT.
inline Complex mul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

// Both count-sketch spectra from one complex transform: the first sketch goes
// in the real part, the second in the imaginary part, and the two are split
// using the conjugate symmetry of real-input spectra.
void sketch_spectra(std::span<const double> x, const SketchParams& params, std::vector<Complex>& a,
                    std::vector<Complex>& b) {
  const auto d = static_cast<std::size_t>(params.d_out());
  std::vector<Complex> z(d, Complex(0.0, 0.0));
  const auto h1 = params.hash(1);
  const auto h2 = params.hash(2);
  const auto s1 = params.signs(1);
  const auto s2 = params.signs(2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    z[static_cast<std::size_t>(h1[i])] += Complex(static_cast<double>(s1[i]) * x[i], 0.0);
    z[static_cast<std::size_t>(h2[i])] += Complex(0.0, static_cast<double>(s2[i]) * x[i]);
  }
  fft_inplace(z, false);
  a.resize(d);
  b.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    const Complex zk = z[k];
    const Complex zm = std::conj(z[(d - k) % d]);
    a[k] = 0.5 * (zk + zm);
    const Complex diff = 0.5 * (zk - zm);  // i * B_k
    b[k] = Complex(diff.imag(), -diff.real());
  }
}

std::span<const double> row_span(const Matrix& y, Index r) {
  return {y.data() + r * y.cols(), static_cast<std::size_t>(y.cols())};
}

Vector sketch_output(const std::vector<Complex>& buf, const SketchParams& params) {
  const double inv_d = 1.0 / static_cast<double>(buf.size());
  Vector out(static_cast<Index>(buf.size()));
  for (Index t = 0; t < out.size(); ++t) {
    out(t) = params.active_bin(t) ? buf[static_cast<std::size_t>(t)].real() * inv_d : 0.0;
  }
  return out;
}

}  // namespace

Vector count_sketch(std::span<const double> x, int table, const SketchParams& params) {
  check_row_length(static_cast<Index>(x.size()), params, "count_sketch");
  Vector out = Vector::Zero(params.d_out());
  const auto h = params.hash(table);
  const auto s = params.signs(table);
  for (std::size_t i = 0; i < x.size(); ++i) out(h[i]) += static_cast<double>(s[i]) * x[i];
  return out;
}

Vector ts_forward(std::span<const double> x, const SketchParams& params) {
  check_row_length(static_cast<Index>(x.size()), params, "ts_forward");
  std::vector<Complex> a, b;
  sketch_spectra(x, params, a, b);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = mul(a[k], b[k]);
  fft_inplace(a, true);
  return sketch_output(a, params);
}

PooledDescriptor ts_pool_forward(const Matrix& y, const SketchParams& params) {
  if (y.rows() < 1) throw InvalidArgument("ts_pool_forward: empty input");
  check_row_length(y.cols(), params, "ts_pool_forward");
  std::vector<Complex> acc(static_cast<std::size_t>(params.d_out()), Complex(0.0, 0.0));
  std::vector<Complex> a, b;
  for (Index r = 0; r < y.rows(); ++r) {
    if (y.row(r).isZero(0.0)) continue;
    sketch_spectra(row_span(y, r), params, a, b);
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += mul(a[k], b[k]);
  }
  fft_inplace(acc, true);
  return PooledDescriptor{sketch_output(acc, params), PoolingKind::kSketch};
}

Matrix ts_pool_backward(const Vector& grad_out, const Matrix& y, const SketchParams& params) {
  check_row_length(y.cols(), params, "ts_pool_backward");
  if (grad_out.size() != params.d_out()) {
    std::ostringstream os;
    os << "ts_pool_backward: gradient has " << grad_out.size() << " entries, expected "
       << params.d_out();
    throw InvalidArgument(os.str());
  }
  const auto d = static_cast<std::size_t>(params.d_out());
  // Circular convolution out = a (*) b has dL/da = ifft(G . conj(B)) and
  // dL/db = ifft(G . conj(A)), with G = fft(grad_out).
  // Inactive bins are constant zero, so their upstream gradient is dropped.
  std::vector<Complex> g(d);
  for (std::size_t t = 0; t < d; ++t) {
    g[t] = params.active_bin(static_cast<Index>(t)) ? grad_out(static_cast<Index>(t)) : 0.0;
  }
  fft_inplace(g, false);

  Matrix grad_y = Matrix::Zero(y.rows(), y.cols());
  if (grad_out.isZero(0.0)) return grad_y;

  const auto h1 = params.hash(1);
  const auto h2 = params.hash(2);
  const auto s1 = params.signs(1);
  const auto s2 = params.signs(2);
  const double inv_d = 1.0 / static_cast<double>(d);
  std::vector<Complex> ga(d);
  std::vector<Complex> a, b;
  for (Index r = 0; r < y.rows(); ++r) {
    if (y.row(r).isZero(0.0)) continue;
    sketch_spectra(row_span(y, r), params, a, b);
    // Both correlations are real, so one inverse transform of ga + i gb
    // returns them as the real and imaginary parts.
    for (std::size_t k = 0; k < d; ++k) {
      const Complex x = mul(g[k], std::conj(b[k]));
      const Complex z = mul(g[k], std::conj(a[k]));
      ga[k] = Complex(x.real() - z.imag(), x.imag() + z.real());
    }
    fft_inplace(ga, true);
    for (Index i = 0; i < y.cols(); ++i) {
      grad_y(r, i) = (s1[i] * ga[static_cast<std::size_t>(h1[i])].real() +
                      s2[i] * ga[static_cast<std::size_t>(h2[i])].imag()) *
                     inv_d;
    }
  }
  return grad_y;
}

}  // namespace monet
