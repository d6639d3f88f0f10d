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

#include "sepc/sepc.hpp"

#include <string>

#include "sepc/deform_conv.hpp"
#include "sepc/error.hpp"
#include "sepc/upsample.hpp"

namespace sepc {

Conv2dKernel zero_offset_predictor(const Conv2dKernel& k) {
  Conv2dKernel pred = Conv2dKernel::make(
      Tensor(Shape{2 * k.kh() * k.kw(), k.c_in(), k.kh(), k.kw()}), k.stride,
      k.padding, /*with_bias=*/true);
  return pred;
}

SepcLayer SepcLayer::from(PConvLayer base) {
  base.validate();
  SepcLayer layer;
  layer.offsets.same = zero_offset_predictor(base.w_same);
  if (base.has_neighbors()) {
    layer.offsets.up = zero_offset_predictor(*base.w_up);
    layer.offsets.down = zero_offset_predictor(*base.w_down);
  }
  layer.base = std::move(base);
  return layer;
}

void SepcLayer::validate() const {
  base.validate();
  auto check = [](const Conv2dKernel& pred, const Conv2dKernel& k,
                  const char* branch) {
    pred.validate();
    const Shape expect{2 * k.kh() * k.kw(), k.c_in(), k.kh(), k.kw()};
    if (pred.weights.shape() != expect || pred.stride != k.stride ||
        pred.padding != k.padding) {
      throw ShapeError(std::string("sepc: ") + branch +
                       " offset predictor must be " + to_string(expect) +
                       " with the kernel's stride and padding");
    }
  };
  check(offsets.same, base.w_same, "same");
  if (base.has_neighbors() != offsets.up.has_value() ||
      base.has_neighbors() != offsets.down.has_value()) {
    throw DomainError("sepc: offset predictors must match the base kernels");
  }
  if (base.has_neighbors()) {
    check(*offsets.up, *base.w_up, "up");
    check(*offsets.down, *base.w_down, "down");
  }
}

namespace {

void check_input(const FeaturePyramid& p, const SepcLayer& layer) {
  p.validate();
  layer.validate();
  if (p.channels() != layer.base.c_in()) {
    throw ShapeError("sepc: shape mismatch on axis c: pyramid has " +
                     std::to_string(p.channels()) + " channels, layer expects " +
                     std::to_string(layer.base.c_in()));
  }
}

Tensor apply_term(const Tensor& x, const Conv2dKernel& k,
                  const Conv2dKernel& pred, bool deform) {
  if (!deform) return conv2d(x, k);
  return deform_conv2d(x, k, conv2d(x, pred));
}

// Backward through apply_term: returns grad wrt x and accumulates kernel and
// predictor gradients.
Tensor apply_term_vjp(const Tensor& x, const Conv2dKernel& k,
                      const Conv2dKernel& pred, bool deform, const Tensor& g,
                      KernelGrad& gk, KernelGrad& gpred) {
  if (!deform) {
    GradTriple t = conv2d_vjp(x, k, g);
    gk.accumulate(t.grad_weights, t.grad_bias);
    return std::move(t.grad_input);
  }
  const Tensor off = conv2d(x, pred);
  DeformGrads d = deform_conv2d_vjp(x, k, off, g);
  gk.accumulate(d.grad_weights, d.grad_bias);
  GradTriple t = conv2d_vjp(x, pred, d.grad_offsets);
  gpred.accumulate(t.grad_weights, t.grad_bias);
  d.grad_input += t.grad_input;
  return std::move(d.grad_input);
}

}  // namespace

FeaturePyramid sepc_forward(const FeaturePyramid& p, const SepcLayer& layer) {
  check_input(p, layer);
  const PConvLayer& b = layer.base;
  const OffsetPredictors& o = layer.offsets;
  FeaturePyramid out;
  out.first_level = p.first_level;
  const std::size_t top = p.size() - 1;
  for (std::size_t l = 0; l < p.size(); ++l) {
    const bool deform = l > 0;
    const std::size_t h = p[l].h();
    const std::size_t w = p[l].w();
    Tensor y = apply_term(p[l], b.w_same, o.same, deform);
    if (b.has_neighbors() && l > 0) {
      y += fit_top_left(apply_term(p[l - 1], *b.w_down, *o.down, deform), h, w);
    }
    if (b.has_neighbors() && l < top) {
      y += fit_top_left(
          upsample_bilinear_x2(apply_term(p[l + 1], *b.w_up, *o.up, deform)), h,
          w);
    }
    out.levels.push_back(std::move(y));
  }
  return out;
}

SepcVjp sepc_vjp(const FeaturePyramid& p, const SepcLayer& layer,
                 const FeaturePyramid& grad_out) {
  check_input(p, layer);
  if (grad_out.size() != p.size()) {
    throw ShapeError("sepc_vjp: level count mismatch");
  }
  const PConvLayer& b = layer.base;
  const OffsetPredictors& o = layer.offsets;
  SepcVjp r{zeros_like(p), {}};
  SepcGrads& g = r.grad_layer;
  g.base.w_same = KernelGrad::zeros_for(b.w_same);
  g.same = KernelGrad::zeros_for(o.same);
  if (b.has_neighbors()) {
    g.base.w_up = KernelGrad::zeros_for(*b.w_up);
    g.base.w_down = KernelGrad::zeros_for(*b.w_down);
    g.up = KernelGrad::zeros_for(*o.up);
    g.down = KernelGrad::zeros_for(*o.down);
  }
  const std::size_t top = p.size() - 1;
  for (std::size_t l = 0; l < p.size(); ++l) {
    const bool deform = l > 0;
    const Tensor& go = grad_out[l];
    const Shape expect{p[l].n(), b.c_out(), p[l].h(), p[l].w()};
    if (go.shape() != expect) {
      require_same_shape(go, Tensor(expect), "sepc_vjp grad_out level");
    }
    r.grad_input[l] +=
        apply_term_vjp(p[l], b.w_same, o.same, deform, go, g.base.w_same, g.same);
    if (b.has_neighbors() && l > 0) {
      const Shape ds = conv2d_output_shape(p[l - 1].shape(), *b.w_down);
      r.grad_input[l - 1] +=
          apply_term_vjp(p[l - 1], *b.w_down, *o.down, deform,
                         fit_top_left_vjp(ds, go), *g.base.w_down, *g.down);
    }
    if (b.has_neighbors() && l < top) {
      const Shape cs = conv2d_output_shape(p[l + 1].shape(), *b.w_up);
      const Shape us{cs.n, cs.c, 2 * cs.h, 2 * cs.w};
      const Tensor gc = upsample_bilinear_x2_vjp(cs, fit_top_left_vjp(us, go));
      r.grad_input[l + 1] += apply_term_vjp(p[l + 1], *b.w_up, *o.up, deform,
                                            gc, *g.base.w_up, *g.up);
    }
  }
  return r;
}

}  // namespace sepc
