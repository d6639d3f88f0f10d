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

// Scale-equalizing pyramid convolution.
//
// Same dataflow as pconv_forward. Every output level above the bottom one
// applies the shared kernels as deformable convolutions; the bottom output
// level uses them as plain convolutions. Each branch (up, same, down) owns one
// offset predictor, shared across levels, which reads the term's input level
// with the branch's stride so its output grid matches the deformable
// convolution's. Predictors start at exactly zero, where the layer reproduces
// pconv_forward bit for bit.

#ifndef SEPC_SEPC_HPP_
#define SEPC_SEPC_HPP_

#include <optional>

#include "sepc/conv.hpp"
#include "sepc/pconv.hpp"
#include "sepc/pyramid.hpp"

namespace sepc {

struct OffsetPredictors {
  std::optional<Conv2dKernel> up;
  Conv2dKernel same;
  std::optional<Conv2dKernel> down;
};

struct SepcLayer {
  PConvLayer base;
  OffsetPredictors offsets;

  /// Wraps `base` with zero-initialized predictors (weights and bias).
  static SepcLayer from(PConvLayer base);

  void validate() const;
};

/// Zero-weight, zero-bias predictor paired with kernel `k`.
Conv2dKernel zero_offset_predictor(const Conv2dKernel& k);

FeaturePyramid sepc_forward(const FeaturePyramid& p, const SepcLayer& layer);

struct SepcGrads {
  PConvGrads base;
  std::optional<KernelGrad> up;
  KernelGrad same;
  std::optional<KernelGrad> down;
};

struct SepcVjp {
  FeaturePyramid grad_input;
  SepcGrads grad_layer;
};

SepcVjp sepc_vjp(const FeaturePyramid& p, const SepcLayer& layer,
                 const FeaturePyramid& grad_out);

}  // namespace sepc

#endif  // SEPC_SEPC_HPP_
