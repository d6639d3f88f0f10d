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

// Deformable 2-D convolution (v1 semantics, one offset group, no mask).
//
// Offset fields have dims (n, 2 * k_h * k_w, H_out, W_out). For kernel point
// i = ky * k_w + kx, channel 2i is the row (y) offset and 2i + 1 the column
// (x) offset, in input pixels. Output (oy, ox) samples the input at
//   (oy * stride - padding + ky + dy,  ox * stride - padding + kx + dx).

#ifndef SEPC_DEFORM_CONV_HPP_
#define SEPC_DEFORM_CONV_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "sepc/conv.hpp"
#include "sepc/tensor.hpp"

namespace sepc {

/// Bilinear interpolation of plane (n, c) at real coordinates (y, x).
/// Corners outside the map read as zero; a point with y <= -1, y >= H,
/// x <= -1 or x >= W returns 0.
double bilinear_sample(const Tensor& x, std::size_t n, std::size_t c, double y,
                       double xc);

struct BilinearGrad {
  double dy = 0.0;  // d value / d y
  double dx = 0.0;  // d value / d x
};

/// Accumulates g * d(value)/d(input) into grad_input and returns
/// g * d(value)/d(y, x). The coordinate derivative uses the floor cell, so it
/// is one-sided on integer coordinates.
BilinearGrad bilinear_sample_vjp(const Tensor& x, std::size_t n, std::size_t c,
                                 double y, double xc, double g,
                                 Tensor& grad_input);

Shape offset_field_shape(const Shape& x, const Conv2dKernel& k);

Tensor deform_conv2d(const Tensor& x, const Conv2dKernel& k,
                     const Tensor& offsets);

struct DeformGrads {
  Tensor grad_input;
  Tensor grad_weights;
  std::optional<std::vector<double>> grad_bias;
  Tensor grad_offsets;
};

DeformGrads deform_conv2d_vjp(const Tensor& x, const Conv2dKernel& k,
                              const Tensor& offsets, const Tensor& grad_out);

}  // namespace sepc

#endif  // SEPC_DEFORM_CONV_HPP_
