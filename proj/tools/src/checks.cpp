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
#include <cstdio>
#include <sstream>

#include "monet/harness/commands.hpp"
#include "monet/rng.hpp"

namespace monet::harness {

namespace {

constexpr int kPointsPerOp = 5;

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Folds several reports of the same op into the worst one.
GradCheckReport worst_of(const std::vector<GradCheckReport>& reports) {
  GradCheckReport worst = reports.front();
  for (const auto& r : reports) {
    if (r.max_rel_err > worst.max_rel_err) worst = r;
    worst.max_abs_err = std::max(worst.max_abs_err, r.max_abs_err);
  }
  worst.pass = true;
  for (const auto& r : reports) worst.pass = worst.pass && r.pass;
  return worst;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double tol_or(const RunConfig& cfg, double fallback) { return cfg.tolerance.value_or(fallback); }

double inner(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

// Spectrum for ssqrt checks: pairwise separation well above 0.1.
Vector separated_spectrum(Index k, Rng& rng) {
  Vector s(k);
  for (Index i = 0; i < k; ++i) {
    s(i) = 0.5 + 0.6 * static_cast<double>(k - 1 - i) + rng.uniform(0.0, 0.2);
  }
  return s;
}

// Upstream probe with entries of magnitude in [0.5, 2]. For a linear map the
// probe is the gradient, so near-zero entries would only measure round-off.
Matrix bounded_probe(Index rows, Index cols, Rng& rng) {
  Matrix g(rows, cols);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = rng.sign() * rng.uniform(0.5, 2.0);
  return g;
}

}  // namespace

std::vector<GradCheckRow> run_gradcheck(const RunConfig& cfg) {
  const Rng root(cfg.seed);
  std::vector<GradCheckRow> rows;
  auto add = [&](const std::string& op, double default_tol, auto&& one_point) {
    std::vector<GradCheckReport> reports;
    for (int p = 0; p < kPointsPerOp; ++p) {
      Rng rng = root.split(fnv1a(op) ^ static_cast<std::uint64_t>(p));
      reports.push_back(one_point(rng, tol_or(cfg, default_tol)));
    }
    GradCheckRow row{worst_of(reports), false, ""};
    row.report.op = op;
    rows.push_back(row);
  };

  add("hm", 1e-7, [](Rng& rng, double tol) {
    const Matrix x = random_normal(6, 3, rng);
    const Matrix g = bounded_probe(6, 4, rng);
    return gradcheck("hm", [&](const Vector& p) { return inner(g, hm_forward(unflatten(p, 6, 3)).matrix); },
                     flatten(hm_backward(g)), flatten(x), kGradStep, tol);
  });

  add("ssqrt", 1e-5, [](Rng& rng, double tol) {
    const Matrix xt = with_singular_values(10, 4, separated_spectrum(4, rng), rng);
    const Matrix g = random_normal(10, 4, rng);
    const SsqrtResult fwd = ssqrt_forward(xt);
    return gradcheck("ssqrt", [&](const Vector& p) { return inner(g, ssqrt_forward(unflatten(p, 10, 4)).y); },
                     flatten(ssqrt_backward(g, fwd.cache)), flatten(xt), kGradStep, tol);
  });

  if (cfg.force_degenerate) {
    GradCheckRow row;
    row.report.op = "ssqrt-degenerate";
    row.report.tolerance = tol_or(cfg, 1e-5);
    Rng rng = root.split(77);
    const Vector s = (Vector(3) << 2.0, 2.0, 1.0).finished();
    const Matrix xt = with_singular_values(8, 3, s, rng);
    try {
      const SsqrtResult fwd = ssqrt_forward(xt);
      (void)ssqrt_backward(random_normal(8, 3, rng), fwd.cache, GuardMode::kVerify);
      row.report.pass = false;
      row.note = "separation guard did not trigger";
    } catch (const SeparationError& e) {
      row.skipped = true;
      row.report.pass = true;
      row.note = e.what();
    }
    rows.push_back(row);
  }

  add("bilinear", 1e-6, [](Rng& rng, double tol) {
    const Matrix y = random_normal(5, 3, rng);
    const Vector g = flatten(random_normal(3, 3, rng));
    return gradcheck("bilinear",
                     [&](const Vector& p) { return g.dot(bilinear_pool_forward(unflatten(p, 5, 3)).values); },
                     flatten(bilinear_pool_backward(g, y)), flatten(y), kGradStep, tol);
  });

  add("ts", 1e-5, [](Rng& rng, double tol) {
    const SketchParams params = SketchParams::generate(5, 16, rng.next_u64());
    const Matrix y = random_normal(4, 5, rng);
    const Vector g = flatten(random_normal(16, 1, rng));
    return gradcheck("ts",
                     [&](const Vector& p) { return g.dot(ts_pool_forward(unflatten(p, 4, 5), params).values); },
                     flatten(ts_pool_backward(g, y, params)), flatten(y), kGradStep, tol);
  });

  add("signed-sqrt", 1e-6, [](Rng& rng, double tol) {
    Vector v(8);
    for (Index i = 0; i < v.size(); ++i) v(i) = rng.sign() * rng.uniform(0.5, 2.0);
    const Vector g = flatten(random_normal(8, 1, rng));
    return gradcheck("signed-sqrt", [&](const Vector& p) { return g.dot(signed_sqrt_forward(p)); },
                     signed_sqrt_backward(g, v), v, kGradStep, tol);
  });

  add("l2", 1e-6, [](Rng& rng, double tol) {
    const Vector v = flatten(random_normal(8, 1, rng));
    const Vector g = flatten(random_normal(8, 1, rng));
    return gradcheck("l2", [&](const Vector& p) { return g.dot(l2_normalize_forward(p)); },
                     l2_normalize_backward(g, v), v, kGradStep, tol);
  });

  add("loss", 1e-7, [](Rng& rng, double tol) {
    const Vector logits = flatten(random_normal(5, 1, rng));
    const Index label = static_cast<Index>(rng.below(5));
    return gradcheck("loss", [&](const Vector& p) { return loss_softmax_ce(p, label).loss; },
                     loss_softmax_ce(logits, label).grad_logits, logits, kGradStep, tol);
  });

  for (const VariantSpec& spec : variant_grid(16)) {
    const std::string op = "head:" + spec.label();
    add(op, 1e-4, [&](Rng& rng, double tol) {
      constexpr Index n = 10;
      constexpr Index c = 4;
      HeadConfig head = HeadConfig::make(spec, c, rng.next_u64());
      head.guard = GuardMode::kVerify;
      head.preprocess_signed_sqrt = true;
      const Matrix x = random_uniform(n, c, 0.5, 2.0, rng);
      ClassifierParams params = ClassifierParams::zeros(3, descriptor_dim(spec, c));
      params.weights = random_normal(3, params.dim(), rng);
      params.bias = flatten(random_normal(3, 1, rng));
      const Index label = static_cast<Index>(rng.below(3));

      HeadOutput fwd = head_forward(x, head, params);
      const LossResult loss = loss_softmax_ce(fwd.logits, label);
      const HeadGradients g = head_backward(loss.grad_logits, fwd.tape, head, params, true);

      // Joint point: input entries followed by classifier weights.
      const Index nx = n * c;
      Vector point(nx + params.weights.size());
      point << flatten(x), flatten(params.weights);
      Vector analytic(point.size());
      analytic << flatten(*g.input), flatten(g.weights);
      auto f = [&](const Vector& p) {
        ClassifierParams q = params;
        q.weights = unflatten(p.tail(params.weights.size()), 3, params.dim());
        const Vector logits = head_forward(unflatten(p.head(nx), n, c), head, q).logits;
        return loss_softmax_ce(logits, label).loss;
      };
      return gradcheck(op, f, analytic, point, kGradStep, tol);
    });
  }
  return rows;
}

bool gradcheck_passed(const std::vector<GradCheckRow>& rows) {
  for (const auto& r : rows) {
    if (!r.report.pass) return false;
  }
  return true;
}

std::string format_gradcheck(const std::vector<GradCheckRow>& rows) {
  std::string out = "op,max_rel_err,tol,pass\n";
  for (const auto& r : rows) {
    out += r.report.op + "," + real(r.report.max_rel_err) + "," + real(r.report.tolerance) + "," +
           (r.skipped ? "skip" : (r.report.pass ? "true" : "false")) + "\n";
  }
  return out;
}

std::vector<CheckRow> run_verify(const RunConfig& cfg) {
  const Rng root(cfg.seed);
  std::vector<CheckRow> rows;
  auto add = [&](const std::string& name, double value, double threshold) {
    rows.push_back({name, value, threshold, value <= threshold});
  };

  {
    Rng rng = root.split(1);
    double worst = 0.0;
    double worst_square = 0.0;
    for (int t = 0; t < 100; ++t) {
      const Index m = 2 + static_cast<Index>(rng.below(16));
      const Index n = m + static_cast<Index>(rng.below(static_cast<std::uint64_t>(65 - m)));
      const Matrix xt = random_normal(n, m, rng);
      const Matrix y = ssqrt_forward(xt).y;
      const Matrix root_m = y.transpose() * y;
      const Matrix moment = xt.transpose() * xt;
      worst = std::max(worst, relative_frobenius(root_m, sqrtm_oracle(moment)));
      worst_square = std::max(worst_square, relative_frobenius(root_m * root_m, moment));
    }
    add("ssqrt_vs_sqrtm_oracle", worst, 1e-10);
    add("ssqrt_square_reconstructs_moment", worst_square, 1e-9);
  }
  {
    Rng rng = root.split(2);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const Index c = 1 + static_cast<Index>(rng.below(16));
      const Index n = 1 + static_cast<Index>(rng.below(64));
      const Matrix x = random_uniform(n, c, -3.0, 3.0, rng);
      const Matrix xt = hm_forward(x).matrix;
      worst = std::max(worst, (xt.transpose() * xt - moment_matrix(gaussian_blocks(x)))
                                  .cwiseAbs()
                                  .maxCoeff());
    }
    add("hm_moment_block_identity", worst, 1e-12);
  }
  {
    Rng rng = root.split(3);
    double recon = 0.0;
    double ortho = 0.0;
    double eig = 0.0;
    for (int t = 0; t < 100; ++t) {
      const Index n = 1 + static_cast<Index>(rng.below(12));
      const Index m = 1 + static_cast<Index>(rng.below(12));
      const Matrix a = random_normal(n, m, rng);
      const SvdResult svd = svd_thin(a);
      const Index k = svd.s.size();
      recon = std::max(recon, relative_frobenius(svd.u * svd.s.asDiagonal() * svd.v.transpose(), a));
      ortho = std::max({ortho, (svd.u.transpose() * svd.u - Matrix::Identity(k, k)).norm(),
                        (svd.v.transpose() * svd.v - Matrix::Identity(k, k)).norm()});
      const Matrix ata = a.transpose() * a;
      const EigResult e = eigh(0.5 * (ata + ata.transpose()));
      for (Index i = 0; i < k; ++i) {
        const double s2 = svd.s(i) * svd.s(i);
        eig = std::max(eig, std::abs(e.values(i) - s2) / std::max(s2, svd.s(0) * svd.s(0)));
      }
    }
    add("svd_reconstruction", recon, 1e-10);
    add("svd_orthonormality", ortho, 1e-10);
    add("eigh_matches_squared_singular_values", eig, 1e-8);
  }
  {
    Rng rng = root.split(4);
    double conv = 0.0;
    double sketch = 0.0;
    for (Index d = 1; d <= 32; ++d) {
      std::vector<double> a(static_cast<std::size_t>(d));
      std::vector<double> b(static_cast<std::size_t>(d));
      for (auto& v : a) v = rng.normal();
      for (auto& v : b) v = rng.normal();
      auto fa = fft_real(a);
      const auto fb = fft_real(b);
      for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
      const auto spectral = ifft_real(fa);
      for (Index t = 0; t < d; ++t) {
        double direct = 0.0;
        for (Index u = 0; u < d; ++u) direct += a[u] * b[(t - u + d) % d];
        conv = std::max(conv, std::abs(direct - spectral[t]));
      }

      const SketchParams params = SketchParams::generate(6, d, rng.next_u64());
      Vector x(6);
      for (Index i = 0; i < 6; ++i) x(i) = rng.normal();
      const Vector ts = ts_forward({x.data(), 6}, params);
      const Vector p1 = count_sketch({x.data(), 6}, 1, params);
      const Vector p2 = count_sketch({x.data(), 6}, 2, params);
      for (Index t = 0; t < d; ++t) {
        double direct = 0.0;
        for (Index u = 0; u < d; ++u) direct += p1(u) * p2((t - u + d) % d);
        sketch = std::max(sketch, std::abs(direct - ts(t)));
      }
    }
    add("fft_circular_convolution", conv, 1e-9);
    add("ts_fft_vs_direct_convolution", sketch, 1e-9);
  }
  return rows;
}

std::string format_checks(const std::vector<CheckRow>& rows) {
  std::string out = "check,value,threshold,pass\n";
  for (const auto& r : rows) {
    out += r.name + "," + real(r.value) + "," + real(r.threshold) + "," +
           (r.pass ? "true" : "false") + "\n";
  }
  return out;
}

std::vector<SketchBenchRow> run_sketchbench(const RunConfig& cfg) {
  std::vector<SketchBenchRow> rows;
  for (Index d : cfg.sketch_dims) {
    // Same x, y and hash stream for every D, so rows differ only in D.
    Rng rng(cfg.seed);
    rows.push_back({d, sketch_quality(cfg.sketch_d_in, d, cfg.sketch_trials, rng)});
  }
  return rows;
}

std::string format_sketchbench(const std::vector<SketchBenchRow>& rows) {
  std::string out = "d_out,trials,target,mean_estimate,bias,mean_error,std_error,absolute\n";
  for (const auto& r : rows) {
    const auto& q = r.quality;
    out += std::to_string(r.d_out) + "," + std::to_string(q.trials) + "," + real(q.target) + "," +
           real(q.mean_estimate) + "," + real(q.bias) + "," + real(q.mean_error) + "," +
           real(q.std_error) + "," + (q.absolute ? "true" : "false") + "\n";
  }
  return out;
}

}  // namespace monet::harness
