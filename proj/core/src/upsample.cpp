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

#include "sepc/upsample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sepc/error.hpp"

namespace sepc {
namespace {

struct Tap {
  std::size_t i0;
  std::size_t i1;
  double w0;
  double w1;
};

// 1-D interpolation taps for every output coordinate along one axis.
std::vector<Tap> taps_for(std::size_t in) {
  std::vector<Tap> taps(2 * in);
  const double hi = static_cast<double>(in - 1);
  for (std::size_t o = 0; o < 2 * in; ++o) {
    double src = (static_cast<double>(o) + 0.5) / 2.0 - 0.5;
    src = std::clamp(src, 0.0, hi);
    const auto i0 = static_cast<std::size_t>(std::floor(src));
    const std::size_t i1 = std::min(i0 + 1, in - 1);
    const double frac = src - static_cast<double>(i0);
    taps[o] = Tap{i0, i1, 1.0 - frac, frac};
  }
  return taps;
}

// a + f * (b - a) returns a exactly when a == b and never leaves [a, b].
double lerp(double a, double b, double f) { return a + f * (b - a); }

void require_nonempty(const Shape& s) {
  if (s.h == 0 || s.w == 0) {
    throw ShapeError("upsample_bilinear_x2: empty spatial extent " +
                     to_string(s));
  }
}

}  // namespace

Tensor upsample_bilinear_x2(const Tensor& x) {
  require_nonempty(x.shape());
  const std::vector<Tap> ty = taps_for(x.h());
  const std::vector<Tap> tx = taps_for(x.w());
  Tensor out(Shape{x.n(), x.c(), 2 * x.h(), 2 * x.w()});
  for (std::size_t n = 0; n < x.n(); ++n) {
    for (std::size_t c = 0; c < x.c(); ++c) {
      const double* src = x.plane(n, c);
      double* dst = out.plane(n, c);
      for (std::size_t oy = 0; oy < ty.size(); ++oy) {
        const Tap& a = ty[oy];
        const double* r0 = src + a.i0 * x.w();
        const double* r1 = src + a.i1 * x.w();
        for (std::size_t ox = 0; ox < tx.size(); ++ox) {
          const Tap& b = tx[ox];
          const double top = lerp(r0[b.i0], r0[b.i1], b.w1);
          const double bot = lerp(r1[b.i0], r1[b.i1], b.w1);
          dst[oy * out.w() + ox] = lerp(top, bot, a.w1);
        }
      }
    }
  }
  return out;
}

Tensor upsample_bilinear_x2_vjp(const Shape& input, const Tensor& grad_out) {
  require_nonempty(input);
  const Shape expect{input.n, input.c, 2 * input.h, 2 * input.w};
  require_same_shape(grad_out, Tensor(expect), "upsample_bilinear_x2_vjp");
  const std::vector<Tap> ty = taps_for(input.h);
  const std::vector<Tap> tx = taps_for(input.w);
  Tensor g(input);
  for (std::size_t n = 0; n < input.n; ++n) {
    for (std::size_t c = 0; c < input.c; ++c) {
      const double* go = grad_out.plane(n, c);
      double* dst = g.plane(n, c);
      for (std::size_t oy = 0; oy < ty.size(); ++oy) {
        const Tap& a = ty[oy];
        double* r0 = dst + a.i0 * input.w;
        double* r1 = dst + a.i1 * input.w;
        for (std::size_t ox = 0; ox < tx.size(); ++ox) {
          const Tap& b = tx[ox];
          const double v = go[oy * expect.w + ox];
          r0[b.i0] += a.w0 * b.w0 * v;
          r0[b.i1] += a.w0 * b.w1 * v;
          r1[b.i0] += a.w1 * b.w0 * v;
          r1[b.i1] += a.w1 * b.w1 * v;
        }
      }
    }
  }
  return g;
}

}  // namespace sepc
