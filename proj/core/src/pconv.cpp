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

#include "sepc/pconv.hpp"

#include <string>

#include "sepc/error.hpp"
#include "sepc/upsample.hpp"

namespace sepc {

PConvLayer PConvLayer::kaiming(std::size_t c_out, std::size_t c_in, Rng& rng,
                               std::size_t k, bool with_bias) {
  PConvLayer layer;
  // Draw order (same, down, up) is fixed so seeds reproduce across releases.
  layer.w_same = Conv2dKernel::kaiming(c_out, c_in, k, 1, rng, with_bias);
  layer.w_down = Conv2dKernel::kaiming(c_out, c_in, k, 2, rng, with_bias);
  layer.w_up = Conv2dKernel::kaiming(c_out, c_in, k, 1, rng, with_bias);
  return layer;
}

PConvLayer PConvLayer::single_scale(Conv2dKernel same) {
  PConvLayer layer;
  layer.w_same = std::move(same);
  layer.validate();
  return layer;
}

void PConvLayer::validate() const {
  w_same.validate();
  if (w_same.stride != 1) throw DomainError("pconv: w_same must have stride 1");
  if (w_up.has_value() != w_down.has_value()) {
    throw DomainError("pconv: w_up and w_down must both be present or absent");
  }
  if (!w_up) return;
  w_up->validate();
  w_down->validate();
  if (w_up->stride != 1) throw DomainError("pconv: w_up must have stride 1");
  if (w_down->stride != 2) throw DomainError("pconv: w_down must have stride 2");
  for (const Conv2dKernel* k : {&*w_up, &*w_down}) {
    if (k->weights.shape() != w_same.weights.shape()) {
      throw ShapeError("pconv: kernels must share c_out, c_in, k_h, k_w; got " +
                       to_string(k->weights.shape()) + " vs " +
                       to_string(w_same.weights.shape()));
    }
  }
}

KernelGrad KernelGrad::zeros_for(const Conv2dKernel& k) {
  KernelGrad g{Tensor::zeros_like(k.weights), std::nullopt};
  if (k.bias) g.bias = std::vector<double>(k.bias->size(), 0.0);
  return g;
}

void KernelGrad::accumulate(const Tensor& gw,
                            const std::optional<std::vector<double>>& gb) {
  weights += gw;
  if (gb && bias) {
    for (std::size_t i = 0; i < bias->size(); ++i) (*bias)[i] += (*gb)[i];
  }
}

namespace {

void check_input(const FeaturePyramid& p, const PConvLayer& layer) {
  p.validate();
  layer.validate();
  if (p.channels() != layer.c_in()) {
    throw ShapeError("pconv: shape mismatch on axis c: pyramid has " +
                     std::to_string(p.channels()) + " channels, layer expects " +
                     std::to_string(layer.c_in()));
  }
}

}  // namespace

FeaturePyramid pconv_forward(const FeaturePyramid& p, const PConvLayer& layer) {
  check_input(p, layer);
  FeaturePyramid out;
  out.first_level = p.first_level;
  const std::size_t top = p.size() - 1;
  for (std::size_t l = 0; l < p.size(); ++l) {
    const std::size_t h = p[l].h();
    const std::size_t w = p[l].w();
    Tensor y = conv2d(p[l], layer.w_same);
    if (layer.has_neighbors() && l > 0) {
      y += fit_top_left(conv2d(p[l - 1], *layer.w_down), h, w);
    }
    if (layer.has_neighbors() && l < top) {
      y += fit_top_left(upsample_bilinear_x2(conv2d(p[l + 1], *layer.w_up)), h,
                        w);
    }
    out.levels.push_back(std::move(y));
  }
  return out;
}

PConvVjp pconv_vjp(const FeaturePyramid& p, const PConvLayer& layer,
                   const FeaturePyramid& grad_out) {
  check_input(p, layer);
  if (grad_out.size() != p.size()) {
    throw ShapeError("pconv_vjp: grad_out has " +
                     std::to_string(grad_out.size()) + " levels, input has " +
                     std::to_string(p.size()));
  }
  PConvVjp r{zeros_like(p), {}};
  r.grad_layer.w_same = KernelGrad::zeros_for(layer.w_same);
  if (layer.has_neighbors()) {
    r.grad_layer.w_up = KernelGrad::zeros_for(*layer.w_up);
    r.grad_layer.w_down = KernelGrad::zeros_for(*layer.w_down);
  }
  const std::size_t top = p.size() - 1;
  for (std::size_t l = 0; l < p.size(); ++l) {
    const Tensor& g = grad_out[l];
    const Shape expect{p[l].n(), layer.c_out(), p[l].h(), p[l].w()};
    if (g.shape() != expect) {
      require_same_shape(g, Tensor(expect), "pconv_vjp grad_out level");
    }
    GradTriple same = conv2d_vjp(p[l], layer.w_same, g);
    r.grad_input[l] += same.grad_input;
    r.grad_layer.w_same.accumulate(same.grad_weights, same.grad_bias);

    if (layer.has_neighbors() && l > 0) {
      const Shape ds = conv2d_output_shape(p[l - 1].shape(), *layer.w_down);
      GradTriple down =
          conv2d_vjp(p[l - 1], *layer.w_down, fit_top_left_vjp(ds, g));
      r.grad_input[l - 1] += down.grad_input;
      r.grad_layer.w_down->accumulate(down.grad_weights, down.grad_bias);
    }
    if (layer.has_neighbors() && l < top) {
      const Shape cs = conv2d_output_shape(p[l + 1].shape(), *layer.w_up);
      const Shape us{cs.n, cs.c, 2 * cs.h, 2 * cs.w};
      const Tensor gc = upsample_bilinear_x2_vjp(cs, fit_top_left_vjp(us, g));
      GradTriple up = conv2d_vjp(p[l + 1], *layer.w_up, gc);
      r.grad_input[l + 1] += up.grad_input;
      r.grad_layer.w_up->accumulate(up.grad_weights, up.grad_bias);
    }
  }
  return r;
}

}  // namespace sepc
