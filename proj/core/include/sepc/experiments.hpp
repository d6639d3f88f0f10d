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

#ifndef SEPC_EXPERIMENTS_HPP_
#define SEPC_EXPERIMENTS_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sepc/calibration.hpp"
#include "sepc/tensor.hpp"

namespace sepc {

// Seeded synthetic experiments shared by the calibration tool, the CLI and
// the acceptance checks.

struct ScaleSpaceExperiment {
  std::size_t size = 128;
  std::uint64_t seed = 7;
  double pre_blur = 2.0;
  double s0 = 0.5;

  static ScaleSpaceExperiment from(const Calibration& cal);
  Tensor input() const;
};

/// Largest interior max-abs gap between blur(blur(x, a), b) and
/// blur(x, a + b) over a fixed set of (a, b) pairs.
double semigroup_discrepancy(const Tensor& x);

/// Interior max-abs gap between jump(jump(x, 1), 1) and jump(x, 2).
double jump_composition_error(const Tensor& x, double s0);

struct EquivarianceExperiment {
  std::size_t size = 256;
  std::size_t levels = 4;
  std::size_t channels = 1;
  std::size_t shift = 1;
  std::uint64_t seed = 11;
  double pre_blur = 2.0;
  double s0 = 0.5;

  static EquivarianceExperiment from(const Calibration& cal);
};

struct EquivarianceOutcome {
  double gaussian = 0.0;
  double control = 0.0;
  /// control / gaussian, or +inf when the Gaussian error is exactly zero.
  double separation = 0.0;
};

EquivarianceOutcome run_equivariance(const EquivarianceExperiment& e);

struct GradcheckResult {
  std::string suite;
  double error = 0.0;
  double tolerance = 0.0;

  bool passed() const { return error <= tolerance; }
};

/// Central-difference checks (step 1e-5) of every reverse-mode kernel.
/// Linear operators are held to 1e-5, the rest to 1e-4.
std::vector<GradcheckResult> run_gradcheck_suites(std::uint64_t seed);

}  // namespace sepc

#endif  // SEPC_EXPERIMENTS_HPP_
