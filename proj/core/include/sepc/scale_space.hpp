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

// Gaussian scale space and Gaussian pyramids.
//
// Scales are in the heat-equation convention: blurring at scale t convolves
// with exp(-|u|^2 / (4 t)), a Gaussian of variance 2 t per axis. Level l of a
// pyramid with initial scale s0 is the base image blurred at
// t = s0 / a^2 - s0, a = 2^-l, then subsampled by 2^l with phase (0, 0).

#ifndef SEPC_SCALE_SPACE_HPP_
#define SEPC_SCALE_SPACE_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sepc/tensor.hpp"

namespace sepc {

struct GaussianPyramidSpec {
  double s0 = 0.5;
  std::size_t levels = 1;

  void validate() const;
};

/// Discrete isotropic Gaussian on a (2 radius + 1)^2 grid, normalized to 1.
struct GaussianKernel2D {
  double t = 0.0;
  std::size_t radius = 0;
  std::vector<double> weights;  // row-major, (2 radius + 1)^2

  std::size_t extent() const { return 2 * radius + 1; }
  double at(std::ptrdiff_t dy, std::ptrdiff_t dx) const {
    const auto r = static_cast<std::ptrdiff_t>(radius);
    return weights[static_cast<std::size_t>((dy + r) *
                                                static_cast<std::ptrdiff_t>(
                                                    extent()) +
                                            dx + r)];
  }
};

struct GaussianPyramid {
  GaussianPyramidSpec spec;
  std::vector<Tensor> levels;
};

/// t = s0 / a^2 - s0 for a downsizing ratio a in (0, 1].
double scale_for_ratio(double a, double s0);

/// Truncation radius ceil(4 sqrt(2 t)), at least 1. Zero for t == 0.
std::size_t blur_radius(double t);

GaussianKernel2D gaussian_kernel(double t, std::size_t radius);

/// Normalized 1-D profile exp(-u^2 / (4 t)), u in [-radius, radius].
std::vector<double> gaussian_kernel_1d(double t, std::size_t radius);

/// Separable zero-padded blur at scale t with radius blur_radius(t).
Tensor gaussian_blur(const Tensor& x, double t);

/// Reference blur that applies the full 2-D kernel directly. Slow; used as
/// an oracle for gaussian_blur.
Tensor gaussian_blur_2d(const Tensor& x, double t);

/// Blur-and-subsample action taking level 0 to level n.
Tensor jump(const Tensor& x, std::size_t n, double s0);

GaussianPyramid build_gaussian_pyramid(const Tensor& x,
                                       const GaussianPyramidSpec& spec);

/// Border (in pixels of the final resolution) outside which compositions of
/// jumps are unaffected by zero padding: the larger of the direct jump's
/// radius and the chained jumps' accumulated radii.
std::size_t lemma_border(std::size_t m, std::size_t n, double s0);

/// Interior relative L2 discrepancy |S_m S_n x - S_{m+n} x| / |S_{m+n} x|.
/// Exactly 0 when m * n == 0.
double verify_lemma1(const Tensor& x, std::size_t m, std::size_t n, double s0);

/// Seeded uniform noise in [0, 1), blurred at scale `pre_blur`.
Tensor band_limited_noise(Shape shape, std::uint64_t seed,
                          double pre_blur = 2.0);

/// L2 norm of x - y restricted to [border, h - border) x [border, w - border)
/// and the L2 norm of y on the same region.
struct InteriorNorms {
  double diff = 0.0;
  double reference = 0.0;
};
InteriorNorms interior_norms(const Tensor& x, const Tensor& y,
                             std::size_t border);

/// Max |x - y| over the interior region.
double interior_max_abs_diff(const Tensor& x, const Tensor& y,
                             std::size_t border);

/// Total variation (sum of absolute forward differences) over the interior.
double interior_total_variation(const Tensor& x, std::size_t border);

}  // namespace sepc

#endif  // SEPC_SCALE_SPACE_HPP_
