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

#include "sepc/conv.hpp"

#include <cmath>
#include <string>

#include "sepc/error.hpp"

namespace sepc {

Conv2dKernel Conv2dKernel::make(Tensor weights, std::size_t stride,
                                std::size_t padding, bool with_bias) {
  Conv2dKernel k;
  k.weights = std::move(weights);
  k.stride = stride;
  k.padding = padding;
  if (with_bias) k.bias = std::vector<double>(k.c_out(), 0.0);
  k.validate();
  return k;
}

Conv2dKernel Conv2dKernel::kaiming(std::size_t c_out, std::size_t c_in,
                                   std::size_t k, std::size_t stride, Rng& rng,
                                   bool with_bias) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(c_in * k * k));
  return make(random_normal(Shape{c_out, c_in, k, k}, rng, stddev), stride,
              k / 2, with_bias);
}

Conv2dKernel Conv2dKernel::zeros(std::size_t c_out, std::size_t c_in,
                                 std::size_t k, std::size_t stride,
                                 bool with_bias) {
  return make(Tensor(Shape{c_out, c_in, k, k}), stride, k / 2, with_bias);
}

void Conv2dKernel::validate() const {
  if (c_out() < 1 || c_in() < 1) {
    throw ShapeError("conv kernel needs c_out >= 1 and c_in >= 1, got " +
                     to_string(weights.shape()));
  }
  if (kh() % 2 == 0 || kw() % 2 == 0) {
    throw ShapeError("conv kernel extents must be odd, got " +
                     std::to_string(kh()) + "x" + std::to_string(kw()));
  }
  if (stride != 1 && stride != 2) {
    throw DomainError("conv stride must be 1 or 2, got " +
                      std::to_string(stride));
  }
  if (bias && bias->size() != c_out()) {
    throw ShapeError("conv bias length " + std::to_string(bias->size()) +
                     " != c_out " + std::to_string(c_out()));
  }
}

std::size_t conv_output_extent(std::size_t in, std::size_t k,
                               std::size_t stride, std::size_t padding) {
  const std::size_t padded = in + 2 * padding;
  if (padded < k) {
    throw DegenerateOutputError("conv output extent < 1: input " +
                                std::to_string(in) + ", kernel " +
                                std::to_string(k) + ", padding " +
                                std::to_string(padding));
  }
  return (padded - k) / stride + 1;
}

Shape conv2d_output_shape(const Shape& x, const Conv2dKernel& k) {
  k.validate();
  if (x.c != k.c_in()) {
    throw ShapeError("conv2d: shape mismatch on axis c: input has " +
                     std::to_string(x.c) + " channels, kernel expects " +
                     std::to_string(k.c_in()));
  }
  return Shape{x.n, k.c_out(), conv_output_extent(x.h, k.kh(), k.stride,
                                                  k.padding),
               conv_output_extent(x.w, k.kw(), k.stride, k.padding)};
}

namespace {

// Valid output range [lo, hi) for which input coordinate o*s - p + t lies in
// [0, in).
struct TapRange {
  std::size_t lo;
  std::size_t hi;
};

TapRange valid_outputs(std::size_t out, std::size_t in, std::size_t stride,
                       std::size_t padding, std::size_t tap) {
  // o*s + tap - p >= 0  <=>  o >= ceil((p - tap) / s)
  std::size_t lo = 0;
  if (padding > tap) lo = (padding - tap + stride - 1) / stride;
  // o*s + tap - p <= in - 1  <=>  o <= (in - 1 + p - tap) / s
  std::size_t hi = 0;
  if (in + padding >= tap + 1) hi = (in - 1 + padding - tap) / stride + 1;
  if (hi > out) hi = out;
  if (lo > hi) lo = hi;
  return {lo, hi};
}

template <bool kCount>
Tensor conv2d_impl(const Tensor& x, const Conv2dKernel& k,
                   std::uint64_t* macs) {
  const Shape os = conv2d_output_shape(x.shape(), k);
  Tensor out(os);
  const std::size_t s = k.stride;
  const std::size_t p = k.padding;
  for (std::size_t n = 0; n < os.n; ++n) {
    for (std::size_t co = 0; co < os.c; ++co) {
      double* dst = out.plane(n, co);
      // Per output element the additions run ci -> ky -> kx; iterating the
      // output plane innermost keeps that order for every element.
      for (std::size_t ci = 0; ci < x.c(); ++ci) {
        const double* src = x.plane(n, ci);
        for (std::size_t ky = 0; ky < k.kh(); ++ky) {
          const TapRange ry = valid_outputs(os.h, x.h(), s, p, ky);
          for (std::size_t kx = 0; kx < k.kw(); ++kx) {
            const TapRange rx = valid_outputs(os.w, x.w(), s, p, kx);
            const double wv = k.weights(co, ci, ky, kx);
            for (std::size_t oy = ry.lo; oy < ry.hi; ++oy) {
              const double* row = src + (oy * s + ky - p) * x.w();
              double* drow = dst + oy * os.w;
              for (std::size_t ox = rx.lo; ox < rx.hi; ++ox) {
                drow[ox] += wv * row[ox * s + kx - p];
              }
            }
          }
        }
      }
      if (k.bias) {
        const double b = (*k.bias)[co];
        for (std::size_t i = 0; i < os.h * os.w; ++i) dst[i] += b;
      }
    }
  }
  if constexpr (kCount) {
    *macs += static_cast<std::uint64_t>(os.n) * os.c * os.h * os.w * x.c() *
             k.kh() * k.kw();
  }
  return out;
}

}  // namespace

Tensor conv2d(const Tensor& x, const Conv2dKernel& k) {
  return conv2d_impl<false>(x, k, nullptr);
}

Tensor conv2d_counted(const Tensor& x, const Conv2dKernel& k,
                      std::uint64_t& macs) {
  return conv2d_impl<true>(x, k, &macs);
}

GradTriple conv2d_vjp(const Tensor& x, const Conv2dKernel& k,
                      const Tensor& grad_out) {
  const Shape os = conv2d_output_shape(x.shape(), k);
  if (grad_out.shape() != os) {
    require_same_shape(grad_out, Tensor(os), "conv2d_vjp grad_out");
  }
  GradTriple g{Tensor::zeros_like(x), Tensor::zeros_like(k.weights),
               std::nullopt};
  const std::size_t s = k.stride;
  const std::size_t p = k.padding;
  for (std::size_t n = 0; n < os.n; ++n) {
    for (std::size_t co = 0; co < os.c; ++co) {
      const double* go = grad_out.plane(n, co);
      for (std::size_t ci = 0; ci < x.c(); ++ci) {
        const double* src = x.plane(n, ci);
        double* gsrc = g.grad_input.plane(n, ci);
        for (std::size_t ky = 0; ky < k.kh(); ++ky) {
          const TapRange ry = valid_outputs(os.h, x.h(), s, p, ky);
          for (std::size_t kx = 0; kx < k.kw(); ++kx) {
            const TapRange rx = valid_outputs(os.w, x.w(), s, p, kx);
            const double wv = k.weights(co, ci, ky, kx);
            double gw = 0.0;
            for (std::size_t oy = ry.lo; oy < ry.hi; ++oy) {
              const std::size_t off = (oy * s + ky - p) * x.w();
              const double* grow = go + oy * os.w;
              for (std::size_t ox = rx.lo; ox < rx.hi; ++ox) {
                const std::size_t ix = ox * s + kx - p;
                gw += grow[ox] * src[off + ix];
                gsrc[off + ix] += wv * grow[ox];
              }
            }
            g.grad_weights(co, ci, ky, kx) += gw;
          }
        }
      }
    }
  }
  if (k.bias) {
    std::vector<double> gb(os.c, 0.0);
    for (std::size_t n = 0; n < os.n; ++n) {
      for (std::size_t co = 0; co < os.c; ++co) {
        const double* go = grad_out.plane(n, co);
        for (std::size_t i = 0; i < os.h * os.w; ++i) gb[co] += go[i];
      }
    }
    g.grad_bias = std::move(gb);
  }
  return g;
}

}  // namespace sepc
