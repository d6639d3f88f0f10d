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

// Synthetic regression task for smoke-training the head: fit the outputs of
// a fixed random "teacher" transform of a seeded input pyramid with plain
// gradient descent on the mean squared error.

#ifndef SEPC_TRAINING_HPP_
#define SEPC_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sepc/head.hpp"

namespace sepc {

struct RegressionTask {
  FeaturePyramid input;
  FeaturePyramid target_cls;
  FeaturePyramid target_loc;
};

/// Head configuration used by the committed task: 2 combined stacks of
/// 4 channels, integrated BN, extra convolutions, no output convolutions.
HeadConfig regression_head_config(SepcVariant variant);

/// 3-level pyramid of 1 x 4 x 16 x 16 input; targets are tanh of a
/// differently seeded head's outputs.
RegressionTask make_regression_task(std::uint64_t seed = 0);

/// 0.5 * mean squared error over both branches, and its gradients.
double regression_loss(const HeadResult& out, const RegressionTask& task,
                       FeaturePyramid* grad_cls = nullptr,
                       FeaturePyramid* grad_loc = nullptr);

struct TrainingRun {
  std::vector<double> losses;  // losses[i] is the loss before step i
  double final_loss = 0.0;     // after the last step
};

TrainingRun train_head(const HeadConfig& cfg, const RegressionTask& task,
                       std::size_t steps, double learning_rate);

}  // namespace sepc

#endif  // SEPC_TRAINING_HPP_
