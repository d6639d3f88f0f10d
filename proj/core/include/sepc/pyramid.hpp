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

#ifndef SEPC_PYRAMID_HPP_
#define SEPC_PYRAMID_HPP_

#include <cstddef>
#include <vector>

#include "sepc/random.hpp"
#include "sepc/tensor.hpp"

namespace sepc {

/// Feature maps ordered from the finest level (index 0, e.g. P3) upward.
///
/// All levels share n and c; each level's spatial extent is within one pixel
/// of half the previous level's.
struct FeaturePyramid {
  std::vector<Tensor> levels;
  std::size_t first_level = 3;  // logical index of levels[0], for reports

  FeaturePyramid() = default;
  explicit FeaturePyramid(std::vector<Tensor> ls, std::size_t first = 3)
      : levels(std::move(ls)), first_level(first) {}

  std::size_t size() const { return levels.size(); }
  bool empty() const { return levels.empty(); }
  Tensor& operator[](std::size_t i) { return levels[i]; }
  const Tensor& operator[](std::size_t i) const { return levels[i]; }
  std::size_t batch() const { return levels.front().n(); }
  std::size_t channels() const { return levels.front().c(); }

  void validate() const;
};

FeaturePyramid zeros_like(const FeaturePyramid& p);
FeaturePyramid operator+(const FeaturePyramid& a, const FeaturePyramid& b);
FeaturePyramid operator-(const FeaturePyramid& a, const FeaturePyramid& b);
FeaturePyramid operator*(double s, const FeaturePyramid& a);
double dot(const FeaturePyramid& a, const FeaturePyramid& b);
double max_abs_diff(const FeaturePyramid& a, const FeaturePyramid& b);
bool bitwise_equal(const FeaturePyramid& a, const FeaturePyramid& b);
void require_same_shape(const FeaturePyramid& a, const FeaturePyramid& b,
                        const char* what);

/// Level dims for a base extent halved with ceil rounding.
std::vector<Shape> ceil_halving_shapes(Shape base, std::size_t levels);

FeaturePyramid random_pyramid(Shape base, std::size_t levels, Rng& rng,
                              double lo = -1.0, double hi = 1.0);
FeaturePyramid constant_pyramid(Shape base, std::size_t levels, double value);

FeaturePyramid relu(const FeaturePyramid& p);
/// grad * 1[x > 0], elementwise per level.
FeaturePyramid relu_vjp(const FeaturePyramid& x, const FeaturePyramid& grad);

}  // namespace sepc

#endif  // SEPC_PYRAMID_HPP_
