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

#ifndef SEPC_UPSAMPLE_HPP_
#define SEPC_UPSAMPLE_HPP_

#include "sepc/tensor.hpp"

namespace sepc {

/// Bilinear x2 upsampling with half-pixel centers.
///
/// Output coordinate o reads input coordinate (o + 0.5) / 2 - 0.5, clamped to
/// [0, extent - 1]. Constants are preserved exactly and outputs never leave
/// the input's [min, max] range.
Tensor upsample_bilinear_x2(const Tensor& x);

/// Adjoint of upsample_bilinear_x2. grad_out has dims (n, c, 2h, 2w).
Tensor upsample_bilinear_x2_vjp(const Shape& input, const Tensor& grad_out);

}  // namespace sepc

#endif  // SEPC_UPSAMPLE_HPP_
