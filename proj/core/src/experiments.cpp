// Copyright 2026 The SEPC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sepc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "sepc/batch_norm.hpp"
#include "sepc/conv.hpp"
#include "sepc/deform_conv.hpp"
#include "sepc/equivariance.hpp"
#include "sepc/grad_check.hpp"
#include "sepc/pconv.hpp"
#include "sepc/random.hpp"
#include "sepc/scale_space.hpp"
#include "sepc/upsample.hpp"

namespace sepc {

namespace {

constexpr double kStep = 1e-5;
constexpr double kLinearTol = 1e-5;
constexpr double kTol = 1e-4;

double tensor_dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Offsets whose fractional parts stay at least 0.2 away from the lattice.
Tensor lattice_avoiding(Shape shape, Rng& rng) {
  Tensor t(shape);
  for (double& v : t.data()) {
    const double whole = static_cast<double>(rng.next() % 3) - 1.0;
    v = whole + rng.uniform(0.2, 0.8);
  }
  return t;
}

GradcheckResult conv_suite(Rng& rng) {
  double err = 0.0;
  for (std::size_t stride : {1, 2}) {
    const Tensor x = random_uniform({2, 3, 7, 6}, rng);
    Conv2dKernel k = Conv2dKernel::kaiming(2, 3, 3, stride, rng, true);
    const Tensor g = random_uniform(conv2d_output_shape(x.shape(), k), rng);
    const GradTriple v = conv2d_vjp(x, k, g);
    err = std::max(err, max_relative_error(
                            v.grad_input,
                            finite_diff_grad(
                                [&](const Tensor& t) { return tensor_dot(g, conv2d(t, k)); },
                                x, kStep)));
    const Conv2dKernel base = k;
    err = std::max(err, max_relative_error(
                            v.grad_weights,
                            finite_diff_grad(
                                [&](const Tensor& w) {
                                  Conv2dKernel q = base;
                                  q.weights = w;
                                  return tensor_dot(g, conv2d(x, q));
                                },
                                k.weights, kStep)));
    err = std::max(err, max_relative_error(
                            *v.grad_bias,
                            finite_diff_grad(
                                [&](std::span<const double> b) {
                                  Conv2dKernel q = base;
                                  q.bias->assign(b.begin(), b.end());
                                  return tensor_dot(g, conv2d(x, q));
                                },
                                *k.bias, kStep)));
  }
  return {"conv2d", err, kLinearTol};
}

GradcheckResult conv_zero_suite(Rng& rng) {
  const Tensor x = random_uniform({1, 2, 5, 5}, rng);
  const Conv2dKernel k = Conv2dKernel::kaiming(2, 2, 3, 1, rng, true);
  const GradTriple v =
      conv2d_vjp(x, k, Tensor(conv2d_output_shape(x.shape(), k)));
  double m = max_abs(v.grad_input);
  m = std::max(m, max_abs(v.grad_weights));
  for (double b : *v.grad_bias) m = std::max(m, std::abs(b));
  return {"conv2d_zero_grad", m, 0.0};
}

GradcheckResult upsample_suite(Rng& rng) {
  const Tensor x = random_uniform({2, 2, 5, 4}, rng);
  const Tensor g = random_uniform({2, 2, 10, 8}, rng);
  const Tensor v = upsample_bilinear_x2_vjp(x.shape(), g);
  const Tensor fd = finite_diff_grad(
      [&](const Tensor& t) { return tensor_dot(g, upsample_bilinear_x2(t)); }, x,
      kStep);
  return {"upsample", max_relative_error(v, fd), kLinearTol};
}

GradcheckResult bilinear_suite(Rng& rng) {
  const Tensor x = random_uniform({1, 2, 6, 6}, rng);
  double err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double y = static_cast<double>(rng.next() % 7) - 1.0 + rng.uniform(0.2, 0.8);
    const double xc = static_cast<double>(rng.next() % 7) - 1.0 + rng.uniform(0.2, 0.8);
    const std::size_t c = rng.next() % 2;
    Tensor gi(x.shape());
    const BilinearGrad d = bilinear_sample_vjp(x, 0, c, y, xc, 1.0, gi);
    const std::vector<double> at{y, xc};
    const std::vector<double> fd = finite_diff_grad(
        [&](std::span<const double> p) { return bilinear_sample(x, 0, c, p[0], p[1]); },
        at, kStep);
    const std::vector<double> an{d.dy, d.dx};
    err = std::max(err, max_relative_error(an, fd));
    err = std::max(err, max_relative_error(
                            gi, finite_diff_grad(
                                    [&](const Tensor& t) {
                                      return bilinear_sample(t, 0, c, y, xc);
                                    },
                                    x, kStep)));
  }
  return {"bilinear_sample", err, kTol};
}

GradcheckResult deform_suite(Rng& rng) {
  double err = 0.0;
  for (std::size_t stride : {1, 2}) {
    const Tensor x = random_uniform({1, 2, 7, 6}, rng);
    const Conv2dKernel k = Conv2dKernel::kaiming(2, 2, 3, stride, rng, true);
    const Tensor off = lattice_avoiding(offset_field_shape(x.shape(), k), rng);
    const Tensor g = random_uniform(conv2d_output_shape(x.shape(), k), rng);
    const DeformGrads v = deform_conv2d_vjp(x, k, off, g);
    auto loss = [&](const Tensor& xi, const Conv2dKernel& ki, const Tensor& oi) {
      return tensor_dot(g, deform_conv2d(xi, ki, oi));
    };
    err = std::max(err, max_relative_error(
                            v.grad_input,
                            finite_diff_grad(
                                [&](const Tensor& t) { return loss(t, k, off); }, x,
                                kStep)));
    err = std::max(err, max_relative_error(
                            v.grad_weights,
                            finite_diff_grad(
                                [&](const Tensor& w) {
                                  Conv2dKernel q = k;
                                  q.weights = w;
                                  return loss(x, q, off);
                                },
                                k.weights, kStep)));
    err = std::max(err, max_relative_error(
                            v.grad_offsets,
                            finite_diff_grad(
                                [&](const Tensor& o) { return loss(x, k, o); }, off,
                                kStep)));
  }
  return {"deform_conv2d", err, kTol};
}

GradcheckResult pconv_suite(Rng& rng) {
  const FeaturePyramid p = random_pyramid({1, 2, 10, 9}, 3, rng);
  const PConvLayer layer = PConvLayer::kaiming(2, 2, rng, 3, true);
  const FeaturePyramid g = random_pyramid({1, 2, 10, 9}, 3, rng);
  const PConvVjp v = pconv_vjp(p, layer, g);
  double err = 0.0;
  for (std::size_t l = 0; l < p.size(); ++l) {
    const Tensor fd = finite_diff_grad(
        [&](const Tensor& t) {
          FeaturePyramid q = p;
          q[l] = t;
          return dot(g, pconv_forward(q, layer));
        },
        p[l], kStep);
    err = std::max(err, max_relative_error(v.grad_input[l], fd));
  }
  auto kernel_error = [&](auto get, const KernelGrad& kg) {
    PConvLayer probe = layer;
    const Tensor fd = finite_diff_grad(
        [&](const Tensor& w) {
          PConvLayer q = layer;
          get(q).weights = w;
          return dot(g, pconv_forward(p, q));
        },
        get(probe).weights, kStep);
    return max_relative_error(kg.weights, fd);
  };
  err = std::max(err, kernel_error([](PConvLayer& q) -> Conv2dKernel& { return q.w_same; },
                                   v.grad_layer.w_same));
  err = std::max(err, kernel_error([](PConvLayer& q) -> Conv2dKernel& { return *q.w_up; },
                                   *v.grad_layer.w_up));
  err = std::max(err, kernel_error([](PConvLayer& q) -> Conv2dKernel& { return *q.w_down; },
                                   *v.grad_layer.w_down));
  return {"pconv", err, kLinearTol};
}

GradcheckResult bn_suite(Rng& rng) {
  double err = 0.0;
  for (BNMode mode : {BNMode::kSingle, BNMode::kIndependent, BNMode::kIntegrated}) {
    const FeaturePyramid p = random_pyramid({2, 2, 5, 4}, 3, rng);
    const FeaturePyramid g = random_pyramid({2, 2, 5, 4}, 3, rng);
    BNState s = BNState::make(mode, 2, 3);
    for (auto& v : s.gamma) {
      for (double& x : v) x = rng.uniform(0.5, 1.5);
    }
    BNState work = s;
    const BNForward f = bn_forward_cached(p, work);
    const BNGrads b = bn_vjp(f.cache, s, g);
    for (std::size_t l = 0; l < p.size(); ++l) {
      const Tensor fd = finite_diff_grad(
          [&](const Tensor& t) {
            FeaturePyramid q = p;
            q[l] = t;
            BNState st = s;
            return dot(g, bn_forward(q, st));
          },
          p[l], kStep);
      err = std::max(err, max_relative_error(b.grad_input[l], fd));
    }
    for (std::size_t k = 0; k < s.gamma.size(); ++k) {
      const std::vector<double> fd = finite_diff_grad(
          [&](std::span<const double> v) {
            BNState st = s;
            st.gamma[k].assign(v.begin(), v.end());
            return dot(g, bn_forward(p, st));
          },
          s.gamma[k], kStep);
      err = std::max(err, max_relative_error(b.grad_gamma[k], fd));
    }
  }
  return {"bn_training", err, kTol};
}

}  // namespace

ScaleSpaceExperiment ScaleSpaceExperiment::from(const Calibration& cal) {
  ScaleSpaceExperiment e;
  if (cal.contains("lemma1_size")) e.size = cal.integer("lemma1_size");
  if (cal.contains("lemma1_seed")) e.seed = cal.integer("lemma1_seed");
  if (cal.contains("lemma1_pre_blur")) e.pre_blur = cal.real("lemma1_pre_blur");
  if (cal.contains("s0")) e.s0 = cal.real("s0");
  return e;
}

Tensor ScaleSpaceExperiment::input() const {
  return band_limited_noise({1, 1, size, size}, seed, pre_blur);
}

double semigroup_discrepancy(const Tensor& x) {
  double worst = 0.0;
  for (auto [a, b] : {std::pair{0.5, 1.0}, std::pair{1.5, 1.5}, std::pair{1.0, 3.0}}) {
    const Tensor chained = gaussian_blur(gaussian_blur(x, a), b);
    const Tensor direct = gaussian_blur(x, a + b);
    const std::size_t border = blur_radius(a) + blur_radius(b) + blur_radius(a + b);
    worst = std::max(worst, interior_max_abs_diff(chained, direct, border));
  }
  return worst;
}

double jump_composition_error(const Tensor& x, double s0) {
  const Tensor chained = jump(jump(x, 1, s0), 1, s0);
  const Tensor direct = jump(x, 2, s0);
  return interior_max_abs_diff(chained, direct, lemma_border(1, 1, s0));
}

EquivarianceExperiment EquivarianceExperiment::from(const Calibration& cal) {
  EquivarianceExperiment e;
  if (cal.contains("equivariance_size")) e.size = cal.integer("equivariance_size");
  if (cal.contains("equivariance_levels")) e.levels = cal.integer("equivariance_levels");
  if (cal.contains("equivariance_seed")) e.seed = cal.integer("equivariance_seed");
  if (cal.contains("s0")) e.s0 = cal.real("s0");
  return e;
}

EquivarianceOutcome run_equivariance(const EquivarianceExperiment& e) {
  const GaussianPyramidSpec spec{e.s0, e.levels};
  const Shape base{1, e.channels, e.size, e.size};
  const GaussianPyramid g =
      build_gaussian_pyramid(band_limited_noise(base, e.seed, e.pre_blur), spec);
  const GaussianPyramid c = control_pyramid(base, spec, e.seed, e.pre_blur);
  const PConvLayer layer = averaging_pconv(e.channels);
  EquivarianceOutcome out;
  out.gaussian = equivariance_error(g, layer, e.shift, e.s0);
  out.control = equivariance_error(c, layer, e.shift, e.s0);
  out.separation = out.gaussian > 0.0 ? out.control / out.gaussian
                                      : std::numeric_limits<double>::infinity();
  return out;
}

std::vector<GradcheckResult> run_gradcheck_suites(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GradcheckResult> r;
  r.push_back(conv_suite(rng));
  r.push_back(conv_zero_suite(rng));
  r.push_back(upsample_suite(rng));
  r.push_back(bilinear_suite(rng));
  r.push_back(deform_suite(rng));
  r.push_back(pconv_suite(rng));
  r.push_back(bn_suite(rng));
  return r;
}

}  // namespace sepc
