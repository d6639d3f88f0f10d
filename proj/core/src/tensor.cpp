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

#include "sepc/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "sepc/error.hpp"

namespace sepc {

std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.n) + ", " + std::to_string(s.c) + ", " +
         std::to_string(s.h) + ", " + std::to_string(s.w) + ")";
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(shape), data_(shape.numel(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + to_string(shape_));
  }
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  const Shape& x = a.shape();
  const Shape& y = b.shape();
  const char* axis = nullptr;
  if (x.n != y.n) {
    axis = "n";
  } else if (x.c != y.c) {
    axis = "c";
  } else if (x.h != y.h) {
    axis = "h";
  } else if (x.w != y.w) {
    axis = "w";
  }
  if (axis != nullptr) {
    throw ShapeError(std::string(what) + ": shape mismatch on axis " + axis +
                     ": " + to_string(x) + " vs " + to_string(y));
  }
}

Tensor operator+(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  out += b;
  return out;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "operator-");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Tensor operator*(double s, const Tensor& a) {
  Tensor out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

Tensor& operator+=(Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "operator+=");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

double sum(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data()) s += v;
  return s;
}

double dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(const Tensor& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) !=
        std::bit_cast<std::uint64_t>(b[i])) {
      return false;
    }
  }
  return true;
}

Tensor fit_top_left(const Tensor& x, std::size_t h, std::size_t w) {
  if (x.h() == h && x.w() == w) return x;
  Tensor out(Shape{x.n(), x.c(), h, w});
  const std::size_t hh = std::min(h, x.h());
  const std::size_t ww = std::min(w, x.w());
  for (std::size_t n = 0; n < x.n(); ++n) {
    for (std::size_t c = 0; c < x.c(); ++c) {
      for (std::size_t y = 0; y < hh; ++y) {
        for (std::size_t xx = 0; xx < ww; ++xx) {
          out(n, c, y, xx) = x(n, c, y, xx);
        }
      }
    }
  }
  return out;
}

Tensor fit_top_left_vjp(const Shape& source, const Tensor& grad_fitted) {
  if (grad_fitted.n() != source.n || grad_fitted.c() != source.c) {
    throw ShapeError("fit_top_left_vjp: batch/channel mismatch");
  }
  return fit_top_left(grad_fitted, source.h, source.w);
}

Tensor subsample(const Tensor& x, std::size_t factor) {
  if (factor == 0) throw DomainError("subsample: factor must be >= 1");
  if (factor == 1) return x;
  const std::size_t h = (x.h() + factor - 1) / factor;
  const std::size_t w = (x.w() + factor - 1) / factor;
  Tensor out(Shape{x.n(), x.c(), h, w});
  for (std::size_t n = 0; n < x.n(); ++n) {
    for (std::size_t c = 0; c < x.c(); ++c) {
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t xx = 0; xx < w; ++xx) {
          out(n, c, y, xx) = x(n, c, y * factor, xx * factor);
        }
      }
    }
  }
  return out;
}

Tensor crop_to_multiple(const Tensor& x, std::size_t multiple) {
  if (multiple == 0) throw DomainError("crop_to_multiple: multiple is 0");
  const std::size_t h = x.h() / multiple * multiple;
  const std::size_t w = x.w() / multiple * multiple;
  if (h == 0 || w == 0) {
    throw DegenerateOutputError("crop_to_multiple: image smaller than " +
                                std::to_string(multiple));
  }
  return fit_top_left(x, h, w);
}

}  // namespace sepc
