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

#include "sepc/pyramid.hpp"

#include <algorithm>
#include <string>

#include "sepc/error.hpp"

namespace sepc {
namespace {

// |2 * child - parent| <= 2, i.e. child within one pixel of parent / 2.
bool halves(std::size_t parent, std::size_t child) {
  const std::size_t twice = 2 * child;
  return twice + 2 >= parent && twice <= parent + 2;
}

}  // namespace

void FeaturePyramid::validate() const {
  if (levels.empty()) throw ShapeError("feature pyramid has no levels");
  const Shape& base = levels.front().shape();
  if (base.n < 1 || base.c < 1) {
    throw ShapeError("feature pyramid needs n >= 1 and c >= 1, got " +
                     to_string(base));
  }
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const Shape& s = levels[l].shape();
    if (s.n != base.n) {
      throw ShapeError("feature pyramid level " + std::to_string(l) +
                       ": shape mismatch on axis n");
    }
    if (s.c != base.c) {
      throw ShapeError("feature pyramid level " + std::to_string(l) +
                       ": shape mismatch on axis c");
    }
    if (s.h < 1 || s.w < 1) {
      throw ShapeError("feature pyramid level " + std::to_string(l) +
                       " is spatially empty");
    }
    if (l > 0) {
      const Shape& prev = levels[l - 1].shape();
      if (!halves(prev.h, s.h) || !halves(prev.w, s.w) || s.h > prev.h ||
          s.w > prev.w) {
        throw ShapeError("feature pyramid level " + std::to_string(l) + " " +
                         to_string(s) + " is not a halving of " +
                         to_string(prev));
      }
    }
  }
}

FeaturePyramid zeros_like(const FeaturePyramid& p) {
  FeaturePyramid out;
  out.first_level = p.first_level;
  for (const Tensor& t : p.levels) out.levels.push_back(Tensor::zeros_like(t));
  return out;
}

void require_same_shape(const FeaturePyramid& a, const FeaturePyramid& b,
                        const char* what) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(what) + ": level count " +
                     std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  for (std::size_t l = 0; l < a.size(); ++l) {
    require_same_shape(a[l], b[l], what);
  }
}

FeaturePyramid operator+(const FeaturePyramid& a, const FeaturePyramid& b) {
  require_same_shape(a, b, "pyramid +");
  FeaturePyramid out = a;
  for (std::size_t l = 0; l < a.size(); ++l) out[l] += b[l];
  return out;
}

FeaturePyramid operator-(const FeaturePyramid& a, const FeaturePyramid& b) {
  require_same_shape(a, b, "pyramid -");
  FeaturePyramid out = a;
  for (std::size_t l = 0; l < a.size(); ++l) out[l] = a[l] - b[l];
  return out;
}

FeaturePyramid operator*(double s, const FeaturePyramid& a) {
  FeaturePyramid out = a;
  for (Tensor& t : out.levels) t = s * t;
  return out;
}

double dot(const FeaturePyramid& a, const FeaturePyramid& b) {
  require_same_shape(a, b, "pyramid dot");
  double s = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) s += dot(a[l], b[l]);
  return s;
}

double max_abs_diff(const FeaturePyramid& a, const FeaturePyramid& b) {
  require_same_shape(a, b, "pyramid max_abs_diff");
  double m = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    m = std::max(m, max_abs_diff(a[l], b[l]));
  }
  return m;
}

bool bitwise_equal(const FeaturePyramid& a, const FeaturePyramid& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (!bitwise_equal(a[l], b[l])) return false;
  }
  return true;
}

std::vector<Shape> ceil_halving_shapes(Shape base, std::size_t levels) {
  std::vector<Shape> shapes;
  shapes.reserve(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    shapes.push_back(base);
    base.h = (base.h + 1) / 2;
    base.w = (base.w + 1) / 2;
  }
  return shapes;
}

FeaturePyramid random_pyramid(Shape base, std::size_t levels, Rng& rng,
                              double lo, double hi) {
  FeaturePyramid p;
  for (const Shape& s : ceil_halving_shapes(base, levels)) {
    p.levels.push_back(random_uniform(s, rng, lo, hi));
  }
  return p;
}

FeaturePyramid constant_pyramid(Shape base, std::size_t levels, double value) {
  FeaturePyramid p;
  for (const Shape& s : ceil_halving_shapes(base, levels)) {
    p.levels.emplace_back(s, value);
  }
  return p;
}

FeaturePyramid relu(const FeaturePyramid& p) {
  FeaturePyramid out = p;
  for (Tensor& t : out.levels) {
    for (double& v : t.data()) v = std::max(v, 0.0);
  }
  return out;
}

FeaturePyramid relu_vjp(const FeaturePyramid& x, const FeaturePyramid& grad) {
  require_same_shape(x, grad, "relu_vjp");
  FeaturePyramid out = grad;
  for (std::size_t l = 0; l < x.size(); ++l) {
    for (std::size_t i = 0; i < x[l].size(); ++i) {
      if (!(x[l][i] > 0.0)) out[l][i] = 0.0;
    }
  }
  return out;
}

}  // namespace sepc
