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

// Scale-equivariance metric for pyramid convolution.
//
// For a pyramid p and shift m, let q be p without its first m levels. On
// every level l = 0 .. L - m - 2 (where q[l] and p[l] have the same term
// structure) the metric compares
//   A = pconv_forward(q)[l]      and      B = jump(pconv_forward(p)[l], m)
// as an interior relative L2 difference, averaged over those levels.

#ifndef SEPC_EQUIVARIANCE_HPP_
#define SEPC_EQUIVARIANCE_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sepc/pconv.hpp"
#include "sepc/scale_space.hpp"

namespace sepc {

struct EquivarianceReport {
  std::vector<double> per_level;
  std::vector<std::size_t> borders;
  double mean = 0.0;
};

/// Border excluded on compared level l, in that level's pixels.
std::size_t equivariance_border(std::size_t l, std::size_t m, double s0,
                                std::size_t kernel_radius);

EquivarianceReport equivariance_report(const GaussianPyramid& p,
                                       const PConvLayer& layer, std::size_t m,
                                       double s0);

double equivariance_error(const GaussianPyramid& p, const PConvLayer& layer,
                          std::size_t m, double s0);

/// PConv layer whose three kernels average a k x k window over all input
/// channels (weights 1 / (k^2 c)).
PConvLayer averaging_pconv(std::size_t channels, std::size_t k = 3);

/// Control pyramid with the marginal statistics of a Gaussian pyramid but no
/// cross-level relation: level l is jump(noise_l, l) for independent noise.
GaussianPyramid control_pyramid(Shape base, const GaussianPyramidSpec& spec,
                                std::uint64_t seed, double pre_blur = 2.0);

GaussianPyramid constant_gaussian_pyramid(Shape base,
                                          const GaussianPyramidSpec& spec,
                                          double value);

}  // namespace sepc

#endif  // SEPC_EQUIVARIANCE_HPP_
