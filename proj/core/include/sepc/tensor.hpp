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

#ifndef SEPC_TENSOR_HPP_
#define SEPC_TENSOR_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sepc {

/// Extent of a rank-4 tensor in (batch, channel, height, width) order.
struct Shape {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t numel() const { return n * c * h * w; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

/// Dense double-precision rank-4 tensor, row-major in (n, c, h, w).
///
/// Value semantics: copies are deep. Operations in this library never
/// modify their tensor arguments.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape) { return Tensor(shape); }
  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape()); }
  static Tensor full(Shape shape, double v) { return Tensor(shape, v); }

  const Shape& shape() const { return shape_; }
  std::size_t n() const { return shape_.n; }
  std::size_t c() const { return shape_.c; }
  std::size_t h() const { return shape_.h; }
  std::size_t w() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t index(std::size_t n, std::size_t c, std::size_t y,
                    std::size_t x) const {
    return ((n * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }

  double& operator()(std::size_t n, std::size_t c, std::size_t y,
                     std::size_t x) {
    return data_[index(n, c, y, x)];
  }
  double operator()(std::size_t n, std::size_t c, std::size_t y,
                    std::size_t x) const {
    return data_[index(n, c, y, x)];
  }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  /// Pointer to the (n, c) plane of h*w values.
  const double* plane(std::size_t n, std::size_t c) const {
    return data_.data() + index(n, c, 0, 0);
  }
  double* plane(std::size_t n, std::size_t c) {
    return data_.data() + index(n, c, 0, 0);
  }

  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Elementwise helpers. Binary ops require equal shapes.
Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& a);
Tensor& operator+=(Tensor& a, const Tensor& b);

double sum(const Tensor& t);
double dot(const Tensor& a, const Tensor& b);
double max_abs(const Tensor& t);
double max_abs_diff(const Tensor& a, const Tensor& b);
bool bitwise_equal(const Tensor& a, const Tensor& b);

/// Copy of the top-left region, zero-filled where the target exceeds the
/// source. Used to reconcile off-by-one level sizes.
Tensor fit_top_left(const Tensor& x, std::size_t h, std::size_t w);

/// Adjoint of fit_top_left: maps a gradient of the fitted tensor back onto a
/// tensor of `source` shape.
Tensor fit_top_left_vjp(const Shape& source, const Tensor& grad_fitted);

/// Every `factor`-th pixel along both spatial axes starting at (0, 0).
Tensor subsample(const Tensor& x, std::size_t factor);

/// Crops h and w down to the nearest multiple of `multiple` (top-left kept).
Tensor crop_to_multiple(const Tensor& x, std::size_t multiple);

void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

}  // namespace sepc

#endif  // SEPC_TENSOR_HPP_
