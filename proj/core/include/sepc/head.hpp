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

// Detection head built from stacked pyramid convolutions.
//
// Combined layout: `stacks` PConv layers shared by both branches, then one
// non-shared scale-extent-1 "extra" layer per branch, then optional 3x3
// output convolutions (K * C classification channels, 4 K box channels).
// Separate layout: each branch owns its own stack. Every PConv and extra
// layer is followed by batch norm (when enabled) and ReLU; output
// convolutions are linear.

#ifndef SEPC_HEAD_HPP_
#define SEPC_HEAD_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sepc/batch_norm.hpp"
#include "sepc/conv.hpp"
#include "sepc/pyramid.hpp"
#include "sepc/sepc.hpp"

namespace sepc {

enum class SepcVariant { kNone, kLite, kFull };

std::string_view to_string(SepcVariant v);
/// Accepts "none", "lite", "full".
SepcVariant parse_sepc_variant(std::string_view s);

struct HeadOutputs {
  std::size_t num_classes = 80;
  std::size_t anchors = 9;
};

struct HeadConfig {
  std::size_t stacks = 4;
  std::size_t channels = 256;
  bool combined = true;
  bool extra_conv = true;
  // false replaces every stacked PConv with a plain shared convolution,
  // giving the conventional head.
  bool pyramid_conv = true;
  std::optional<BNMode> bn_mode;
  SepcVariant sepc_variant = SepcVariant::kNone;
  std::optional<HeadOutputs> outputs;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One PConv (or scale-extent-1) layer with its normalization.
struct HeadLayer {
  SepcLayer conv;
  bool deformable = false;
  std::optional<BNState> bn;
};

struct HeadBranch {
  std::vector<HeadLayer> stacks;  // empty in the combined layout
  std::optional<HeadLayer> extra;
  std::optional<Conv2dKernel> output;
};

/// Trainable parameters plus BN running statistics. A zero-valued copy of
/// the same structure holds gradients.
struct HeadParams {
  std::vector<HeadLayer> shared;  // combined layout only
  HeadBranch cls;
  HeadBranch loc;
};

/// Seeded initialization for a pyramid with `levels` levels. Offset
/// predictors start at zero; deformable flags follow cfg.sepc_variant.
HeadParams init_head(const HeadConfig& cfg, std::size_t levels);

/// Sets the deformable flag of every layer: none leaves all layers plain,
/// lite deforms only the extra layers, full deforms stacks and extras.
void build_head_variant(const HeadConfig& cfg, HeadParams& params);

/// Same structure as `params` with every trainable value zero.
HeadParams zeros_like(const HeadParams& params);

/// Visits trainable values (conv weights and biases, BN gamma and beta) in a
/// fixed order. Running statistics are not visited.
void for_each_parameter(HeadParams& params,
                        const std::function<void(std::span<double>)>& fn);
std::size_t parameter_count(const HeadParams& params);
std::vector<double> flatten_parameters(const HeadParams& params);
void assign_parameters(HeadParams& params, std::span<const double> values);

struct HeadResult {
  FeaturePyramid cls;
  FeaturePyramid loc;
};

/// Forward pass. Training-mode BN updates running statistics in `params`.
HeadResult head_forward(const FeaturePyramid& p, const HeadConfig& cfg,
                        HeadParams& params);

struct HeadGradients {
  FeaturePyramid grad_input;
  HeadParams grad_params;
};

/// Runs the forward pass and back-propagates grad_cls / grad_loc.
/// BN running statistics are updated once, as in head_forward.
HeadGradients head_vjp(const FeaturePyramid& p, const HeadConfig& cfg,
                       HeadParams& params, const FeaturePyramid& grad_cls,
                       const FeaturePyramid& grad_loc);

}  // namespace sepc

#endif  // SEPC_HEAD_HPP_
