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

#ifndef SEPC_CONV_HPP_
#define SEPC_CONV_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "sepc/random.hpp"
#include "sepc/tensor.hpp"

namespace sepc {

/// Weights (c_out, c_in, k_h, k_w) plus stride, padding and optional bias.
///
/// Kernel extents must be odd and stride must be 1 or 2. Use make() or call
/// validate() after mutating fields directly.
struct Conv2dKernel {
  Tensor weights;
  std::optional<std::vector<double>> bias;
  std::size_t stride = 1;
  std::size_t padding = 0;

  static Conv2dKernel make(Tensor weights, std::size_t stride,
                           std::size_t padding, bool with_bias = false);

  /// Kaiming-style initialization: N(0, 2 / fan_in), padding k/2.
  static Conv2dKernel kaiming(std::size_t c_out, std::size_t c_in,
                              std::size_t k, std::size_t stride, Rng& rng,
                              bool with_bias = false);

  /// All-zero weights (and bias when requested), padding k/2.
  static Conv2dKernel zeros(std::size_t c_out, std::size_t c_in,
                            std::size_t k, std::size_t stride,
                            bool with_bias = false);

  std::size_t c_out() const { return weights.n(); }
  std::size_t c_in() const { return weights.c(); }
  std::size_t kh() const { return weights.h(); }
  std::size_t kw() const { return weights.w(); }

  void validate() const;
};

/// floor((in + 2 * padding - k) / stride) + 1, or DegenerateOutputError.
std::size_t conv_output_extent(std::size_t in, std::size_t k,
                               std::size_t stride, std::size_t padding);

Shape conv2d_output_shape(const Shape& x, const Conv2dKernel& k);

/// Zero-padded cross-correlation.
///
/// Each output element accumulates input channels outermost, then kernel
/// rows, then kernel columns, starting from 0.0; the bias is added last.
/// That order is part of the contract: deform_conv2d with zero offsets and
/// the naive test oracle reproduce it bit for bit.
Tensor conv2d(const Tensor& x, const Conv2dKernel& k);

/// conv2d that also counts every multiply-accumulate it performs, padded taps
/// included. Adds to `macs`.
Tensor conv2d_counted(const Tensor& x, const Conv2dKernel& k,
                      std::uint64_t& macs);

struct GradTriple {
  Tensor grad_input;
  Tensor grad_weights;
  std::optional<std::vector<double>> grad_bias;
};

/// Gradients of L = sum(grad_out * conv2d(x, k)).
GradTriple conv2d_vjp(const Tensor& x, const Conv2dKernel& k,
                      const Tensor& grad_out);

}  // namespace sepc

#endif  // SEPC_CONV_HPP_
