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

#ifndef SEPC_RANDOM_HPP_
#define SEPC_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "sepc/tensor.hpp"

namespace sepc {

/// Seeded generator with platform-independent output.
///
/// std::uniform_real_distribution and friends are implementation-defined, so
/// the conversions from raw 64-bit draws are done here. Golden values in the
/// calibration file depend on this sequence.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one draw per call, the pair's second
  /// value is discarded).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

Tensor random_uniform(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0);
Tensor random_normal(Shape shape, Rng& rng, double stddev = 1.0);

}  // namespace sepc

#endif  // SEPC_RANDOM_HPP_
