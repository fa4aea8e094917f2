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

#include <cmath>
#include <memory>
#include <numbers>
#include <unordered_map>

#include "monet/numkernel.hpp"

namespace monet {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// std::complex multiplication goes through the C99 NaN-recovery path unless
// fast-math is on; inputs here are always finite.
inline Complex mul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

struct Radix2Plan {
  std::vector<std::size_t> swaps;  // (i, j) pairs flattened, i < j
  std::vector<Complex> twiddle;    // exp(-2 pi i k / n), k < n / 2
};

struct BluesteinPlan {
  std::size_t m = 0;
  std::vector<Complex> chirp;        // exp(-i pi t^2 / n)
  std::vector<Complex> kernel_fwd;   // FFT_m of the conjugate chirp, wrapped
  std::vector<Complex> kernel_inv;   // same for the inverse direction
};

Complex unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

const Radix2Plan& radix2_plan(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<Radix2Plan>> cache;
  auto& slot = cache[n];
  if (!slot) {
    slot = std::make_unique<Radix2Plan>();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) {
        slot->swaps.push_back(i);
        slot->swaps.push_back(j);
      }
    }
    // Each twiddle is evaluated directly so rounding does not accumulate.
    slot->twiddle.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      slot->twiddle[k] = unit(-2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    }
  }
  return *slot;
}

void radix2(std::vector<Complex>& a, bool inverse) {
  const std::size_t n = a.size();
  const Radix2Plan& plan = radix2_plan(n);
  for (std::size_t p = 0; p < plan.swaps.size(); p += 2) std::swap(a[plan.swaps[p]], a[plan.swaps[p + 1]]);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        Complex w = plan.twiddle[k * stride];
        if (inverse) w = std::conj(w);
        const Complex even = a[start + k];
        const Complex odd = mul(a[start + k + half], w);
        a[start + k] = even + odd;
        a[start + k + half] = even - odd;
      }
    }
  }
}

const BluesteinPlan& bluestein_plan(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<BluesteinPlan>> cache;
  auto& slot = cache[n];
  if (!slot) {
    slot = std::make_unique<BluesteinPlan>();
    BluesteinPlan& plan = *slot;
    plan.m = 1;
    while (plan.m < 2 * n - 1) plan.m <<= 1;
    plan.chirp.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      // t^2 mod 2n keeps the angle argument small for large t.
      const std::size_t t2 = (t * t) % (2 * n);
      plan.chirp[t] = unit(-std::numbers::pi * static_cast<double>(t2) / static_cast<double>(n));
    }
    for (bool inverse : {false, true}) {
      std::vector<Complex> g(plan.m, Complex(0.0, 0.0));
      for (std::size_t t = 0; t < n; ++t) {
        const Complex w = inverse ? plan.chirp[t] : std::conj(plan.chirp[t]);
        g[t] = w;
        if (t > 0) g[plan.m - t] = w;
      }
      radix2(g, false);
      (inverse ? plan.kernel_inv : plan.kernel_fwd) = std::move(g);
    }
  }
  return *slot;
}

// Chirp-z: X_k = c_k * sum_t (x_t c_t) conj(c_{k-t}), c_t = exp(-i pi t^2 / n)
// (conjugated chirp for the inverse direction).
void bluestein(std::vector<Complex>& a, bool inverse) {
  const std::size_t n = a.size();
  const BluesteinPlan& plan = bluestein_plan(n);
  std::vector<Complex> f(plan.m, Complex(0.0, 0.0));
  for (std::size_t t = 0; t < n; ++t) {
    f[t] = mul(a[t], inverse ? std::conj(plan.chirp[t]) : plan.chirp[t]);
  }
  radix2(f, false);
  const auto& kernel = inverse ? plan.kernel_inv : plan.kernel_fwd;
  for (std::size_t i = 0; i < plan.m; ++i) f[i] = mul(f[i], kernel[i]);
  radix2(f, true);
  const double inv_m = 1.0 / static_cast<double>(plan.m);
  for (std::size_t k = 0; k < n; ++k) {
    a[k] = mul(f[k] * inv_m, inverse ? std::conj(plan.chirp[k]) : plan.chirp[k]);
  }
}

}  // namespace

void fft_inplace(std::vector<Complex>& data, bool inverse) {
  if (data.size() <= 1) return;
  if (is_power_of_two(data.size())) {
    radix2(data, inverse);
  } else {
    bluestein(data, inverse);
  }
}

std::vector<Complex> fft_real(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("fft_real: length must be >= 1");
  std::vector<Complex> data(x.begin(), x.end());
  fft_inplace(data, false);
  return data;
}

std::vector<double> ifft_real(std::span<const Complex> spectrum) {
  if (spectrum.empty()) throw InvalidArgument("ifft_real: length must be >= 1");
  std::vector<Complex> data(spectrum.begin(), spectrum.end());
  fft_inplace(data, true);
  const double inv_n = 1.0 / static_cast<double>(data.size());
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[i].real() * inv_n;
  return out;
}

}  // namespace monet
