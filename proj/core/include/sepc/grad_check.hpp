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

#ifndef SEPC_GRAD_CHECK_HPP_
#define SEPC_GRAD_CHECK_HPP_

#include <functional>
#include <span>
#include <vector>

#include "sepc/tensor.hpp"

namespace sepc {

using ScalarFn = std::function<double(const Tensor&)>;

/// Central differences (f(x + step e_i) - f(x - step e_i)) / (2 step) for
/// every element i of x. Exceptions thrown by f propagate.
Tensor finite_diff_grad(const ScalarFn& f, const Tensor& x, double step);

/// Same as finite_diff_grad for a flat parameter vector.
std::vector<double> finite_diff_grad(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double step);

/// Relative error max_i |a_i - b_i| / max(|a_i|, |b_i|, floor).
///
/// The floor keeps gradients that are zero up to round-off from dominating;
/// with O(1) test losses it acts as an absolute tolerance below |g| = floor.
double max_relative_error(std::span<const double> a, std::span<const double> b,
                          double floor = 1e-3);
double max_relative_error(const Tensor& a, const Tensor& b,
                          double floor = 1e-3);

}  // namespace sepc

#endif  // SEPC_GRAD_CHECK_HPP_
