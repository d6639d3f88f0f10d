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

#include "sepc/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sepc/error.hpp"

namespace sepc {

Tensor finite_diff_grad(const ScalarFn& f, const Tensor& x, double step) {
  if (!(step > 0.0)) throw DomainError("finite_diff_grad: step must be > 0");
  Tensor probe = x;
  Tensor grad = Tensor::zeros_like(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + step;
    const double fp = f(probe);
    probe[i] = orig - step;
    const double fm = f(probe);
    probe[i] = orig;
    grad[i] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

std::vector<double> finite_diff_grad(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double step) {
  if (!(step > 0.0)) throw DomainError("finite_diff_grad: step must be > 0");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + step;
    const double fp = f(probe);
    probe[i] = orig - step;
    const double fm = f(probe);
    probe[i] = orig;
    grad[i] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

double max_relative_error(std::span<const double> a, std::span<const double> b,
                          double floor) {
  if (a.size() != b.size()) {
    throw ShapeError("max_relative_error: length mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

double max_relative_error(const Tensor& a, const Tensor& b, double floor) {
  require_same_shape(a, b, "max_relative_error");
  return max_relative_error(a.data(), b.data(), floor);
}

}  // namespace sepc
