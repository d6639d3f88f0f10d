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

// Pyramid convolution: a 3-D convolution over (scale, height, width) built
// from three 2-D kernels. For output level l
//
//   y[l] = Upsample(w_up * x[l+1]) + w_same * x[l] + w_down *_(stride 2) x[l-1]
//
// where the first term is dropped at the top level and the last at the
// bottom. Terms are summed in that order (same, down, up). Neighbor terms
// whose extent differs from level l by a pixel are fitted top-left anchored.

#ifndef SEPC_PCONV_HPP_
#define SEPC_PCONV_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "sepc/conv.hpp"
#include "sepc/pyramid.hpp"
#include "sepc/random.hpp"

namespace sepc {

/// The three kernels of a pyramid convolution.
///
/// w_up and w_down are absent for a scale-extent-1 layer, which reduces to a
/// plain convolution shared across levels.
struct PConvLayer {
  std::optional<Conv2dKernel> w_up;    // stride 1, result upsampled x2
  Conv2dKernel w_same;                 // stride 1
  std::optional<Conv2dKernel> w_down;  // stride 2

  static PConvLayer kaiming(std::size_t c_out, std::size_t c_in, Rng& rng,
                            std::size_t k = 3, bool with_bias = false);
  static PConvLayer single_scale(Conv2dKernel same);

  bool has_neighbors() const { return w_up.has_value(); }
  std::size_t c_in() const { return w_same.c_in(); }
  std::size_t c_out() const { return w_same.c_out(); }

  void validate() const;
};

/// Per-term gradients of a PConvLayer. Absent kernels have absent gradients.
struct KernelGrad {
  Tensor weights;
  std::optional<std::vector<double>> bias;

  static KernelGrad zeros_for(const Conv2dKernel& k);
  void accumulate(const Tensor& gw, const std::optional<std::vector<double>>& gb);
};

struct PConvGrads {
  std::optional<KernelGrad> w_up;
  KernelGrad w_same;
  std::optional<KernelGrad> w_down;
};

struct PConvVjp {
  FeaturePyramid grad_input;
  PConvGrads grad_layer;
};

FeaturePyramid pconv_forward(const FeaturePyramid& p, const PConvLayer& layer);

PConvVjp pconv_vjp(const FeaturePyramid& p, const PConvLayer& layer,
                   const FeaturePyramid& grad_out);

}  // namespace sepc

#endif  // SEPC_PCONV_HPP_
