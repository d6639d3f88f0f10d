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

#include "sepc/equivariance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sepc/error.hpp"

namespace sepc {

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

FeaturePyramid as_feature_pyramid(const GaussianPyramid& p, std::size_t skip) {
  FeaturePyramid f;
  f.first_level = 0;
  f.levels.assign(p.levels.begin() + static_cast<std::ptrdiff_t>(skip),
                  p.levels.end());
  return f;
}

}  // namespace

std::size_t equivariance_border(std::size_t l, std::size_t m, double s0,
                                std::size_t kernel_radius) {
  // Pyramid construction artifacts on the compared level and the level above
  // it (read by the up term at twice the pixel size), zero-padding artifacts
  // of both PConv evaluations, and their spread under the final jump.
  const std::size_t pyramid =
      std::max(lemma_border(m, l, s0), 2 * lemma_border(m, l + 1, s0));
  const std::size_t spread = ceil_div(
      blur_radius(scale_for_ratio(1.0 / static_cast<double>(std::size_t{1} << m),
                                  s0)),
      std::size_t{1} << m);
  return pyramid + spread + 2 * kernel_radius + 1;
}

EquivarianceReport equivariance_report(const GaussianPyramid& p,
                                       const PConvLayer& layer, std::size_t m,
                                       double s0) {
  if (!(s0 > 0.0)) throw DomainError("equivariance: s0 must be > 0");
  const std::size_t levels = p.levels.size();
  if (levels < m + 2) {
    throw DomainError("equivariance: need at least m + 2 = " +
                      std::to_string(m + 2) + " levels, got " +
                      std::to_string(levels));
  }
  EquivarianceReport r;
  if (m == 0) {
    r.per_level.assign(levels - 1, 0.0);
    r.borders.assign(levels - 1, 0);
    return r;
  }
  const FeaturePyramid full = pconv_forward(as_feature_pyramid(p, 0), layer);
  const FeaturePyramid shifted = pconv_forward(as_feature_pyramid(p, m), layer);
  const std::size_t kr = std::max(layer.w_same.kh(), layer.w_same.kw()) / 2;
  double total = 0.0;
  for (std::size_t l = 0; l + m + 2 <= levels; ++l) {
    const Tensor& a = shifted[l];
    const Tensor b = jump(full[l], m, s0);
    require_same_shape(a, b, "equivariance level");
    const std::size_t border = equivariance_border(l, m, s0, kr);
    if (2 * border >= std::min(a.h(), a.w())) {
      throw DomainError("equivariance: level " + std::to_string(l) + " (" +
                        std::to_string(a.h()) + "x" + std::to_string(a.w()) +
                        ") has no interior beyond a border of " +
                        std::to_string(border) + "; use a larger image");
    }
    const InteriorNorms n = interior_norms(a, b, border);
    const double e = n.reference > 0.0 ? n.diff / n.reference : n.diff;
    r.per_level.push_back(e);
    r.borders.push_back(border);
    total += e;
  }
  r.mean = total / static_cast<double>(r.per_level.size());
  return r;
}

double equivariance_error(const GaussianPyramid& p, const PConvLayer& layer,
                          std::size_t m, double s0) {
  return equivariance_report(p, layer, m, s0).mean;
}

PConvLayer averaging_pconv(std::size_t channels, std::size_t k) {
  const double v = 1.0 / static_cast<double>(k * k * channels);
  auto kernel = [&](std::size_t stride) {
    return Conv2dKernel::make(Tensor(Shape{channels, channels, k, k}, v),
                              stride, k / 2);
  };
  return PConvLayer{kernel(1), kernel(1), kernel(2)};
}

GaussianPyramid control_pyramid(Shape base, const GaussianPyramidSpec& spec,
                                std::uint64_t seed, double pre_blur) {
  spec.validate();
  GaussianPyramid g;
  g.spec = spec;
  for (std::size_t l = 0; l < spec.levels; ++l) {
    const Tensor noise = band_limited_noise(base, seed + 1000003 * l, pre_blur);
    g.levels.push_back(jump(noise, l, spec.s0));
  }
  return g;
}

GaussianPyramid constant_gaussian_pyramid(Shape base,
                                          const GaussianPyramidSpec& spec,
                                          double value) {
  return build_gaussian_pyramid(Tensor(base, value), spec);
}

}  // namespace sepc
