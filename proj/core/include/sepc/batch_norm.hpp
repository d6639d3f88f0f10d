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

// Batch normalization over a feature pyramid.
//
//   single       per-level statistics, one shared (gamma, beta)
//   independent  per-level statistics, per-level (gamma, beta)
//   integrated   statistics pooled over every level, one shared (gamma, beta)
//
// Training mode normalizes with biased batch statistics and updates
//   running = (1 - momentum) * running + momentum * batch.
// Evaluation mode reads the running statistics only.
//
// Training-mode calls mutate BNState and must be externally synchronized.

#ifndef SEPC_BATCH_NORM_HPP_
#define SEPC_BATCH_NORM_HPP_

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "sepc/pyramid.hpp"

namespace sepc {

enum class BNMode { kSingle, kIndependent, kIntegrated };

std::string_view to_string(BNMode mode);
/// Accepts "single", "independent", "integrated".
BNMode parse_bn_mode(std::string_view s);

struct BNState {
  BNMode mode = BNMode::kIntegrated;
  // One vector per parameter group: `levels` groups for independent, else 1.
  std::vector<std::vector<double>> gamma;
  std::vector<std::vector<double>> beta;
  // One vector per statistics group: 1 for integrated, else `levels`.
  std::vector<std::vector<double>> running_mean;
  std::vector<std::vector<double>> running_var;
  double eps = 1e-5;
  double momentum = 0.1;
  bool training = true;

  /// gamma = 1, beta = 0, running mean 0, running var 1.
  static BNState make(BNMode mode, std::size_t channels, std::size_t levels);

  std::size_t channels() const { return gamma.front().size(); }
  std::size_t param_group(std::size_t level) const;
  std::size_t stat_group(std::size_t level) const;

  void validate(const FeaturePyramid& p) const;
};

struct ChannelMoments {
  std::vector<double> mean;
  std::vector<double> var;  // biased
};

/// Per-channel moments pooled over every level, batch item and pixel.
ChannelMoments ibn_statistics(const FeaturePyramid& p);

/// Per-channel moments of a single tensor.
ChannelMoments channel_moments(const Tensor& x);

struct BNCache {
  FeaturePyramid x_hat;
  std::vector<std::vector<double>> inv_std;  // per statistics group
  bool batch_stats = true;
};

struct BNForward {
  FeaturePyramid out;
  BNCache cache;
};

BNForward bn_forward_cached(const FeaturePyramid& p, BNState& s);
FeaturePyramid bn_forward(const FeaturePyramid& p, BNState& s);

struct BNGrads {
  FeaturePyramid grad_input;
  std::vector<std::vector<double>> grad_gamma;
  std::vector<std::vector<double>> grad_beta;
};

/// Reverse-mode gradients for the forward call that produced `cache`.
BNGrads bn_vjp(const BNCache& cache, const BNState& s,
               const FeaturePyramid& grad_out);

}  // namespace sepc

#endif  // SEPC_BATCH_NORM_HPP_
