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

#include "sepc/training.hpp"

#include <cmath>

namespace sepc {

HeadConfig regression_head_config(SepcVariant variant) {
  HeadConfig cfg;
  cfg.stacks = 2;
  cfg.channels = 4;
  cfg.bn_mode = BNMode::kIntegrated;
  cfg.outputs = HeadOutputs{2, 1};
  cfg.sepc_variant = variant;
  cfg.seed = 1;
  return cfg;
}

RegressionTask make_regression_task(std::uint64_t seed) {
  Rng rng(seed);
  RegressionTask task;
  task.input = random_pyramid({1, 4, 16, 16}, 3, rng);
  HeadConfig teacher_cfg = regression_head_config(SepcVariant::kNone);
  teacher_cfg.seed = seed + 1000;
  HeadParams teacher = init_head(teacher_cfg, 3);
  const HeadResult t = head_forward(task.input, teacher_cfg, teacher);
  auto squash = [](FeaturePyramid p) {
    for (Tensor& level : p.levels) {
      for (double& v : level.data()) v = std::tanh(v);
    }
    return p;
  };
  task.target_cls = squash(t.cls);
  task.target_loc = squash(t.loc);
  return task;
}

double regression_loss(const HeadResult& out, const RegressionTask& task,
                       FeaturePyramid* grad_cls, FeaturePyramid* grad_loc) {
  double count = 0.0;
  for (const auto* p : {&out.cls, &out.loc}) {
    for (const Tensor& t : p->levels) count += static_cast<double>(t.size());
  }
  double loss = 0.0;
  auto branch = [&](const FeaturePyramid& y, const FeaturePyramid& target,
                    FeaturePyramid* grad) {
    const FeaturePyramid diff = y - target;
    loss += 0.5 * dot(diff, diff) / count;
    if (grad) *grad = (1.0 / count) * diff;
  };
  branch(out.cls, task.target_cls, grad_cls);
  branch(out.loc, task.target_loc, grad_loc);
  return loss;
}

TrainingRun train_head(const HeadConfig& cfg, const RegressionTask& task,
                       std::size_t steps, double learning_rate) {
  HeadParams params = init_head(cfg, task.input.size());
  TrainingRun run;
  for (std::size_t step = 0; step < steps; ++step) {
    HeadParams probe = params;
    FeaturePyramid gc;
    FeaturePyramid gl;
    run.losses.push_back(
        regression_loss(head_forward(task.input, cfg, probe), task, &gc, &gl));
    HeadGradients g = head_vjp(task.input, cfg, params, gc, gl);
    std::vector<double> theta = flatten_parameters(params);
    const std::vector<double> grad = flatten_parameters(g.grad_params);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      theta[i] -= learning_rate * grad[i];
    }
    assign_parameters(params, theta);
  }
  run.final_loss =
      regression_loss(head_forward(task.input, cfg, params), task);
  return run;
}

}  // namespace sepc
