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

#include "sepc/head.hpp"

#include <string>

#include "sepc/error.hpp"

namespace sepc {

std::string_view to_string(SepcVariant v) {
  switch (v) {
    case SepcVariant::kNone:
      return "none";
    case SepcVariant::kLite:
      return "lite";
    case SepcVariant::kFull:
      return "full";
  }
  return "?";
}

SepcVariant parse_sepc_variant(std::string_view s) {
  if (s == "none") return SepcVariant::kNone;
  if (s == "lite") return SepcVariant::kLite;
  if (s == "full") return SepcVariant::kFull;
  throw ConfigError("unknown sepc variant '" + std::string(s) + "'");
}

void HeadConfig::validate() const {
  if (stacks < 2 || stacks > 6) {
    throw ConfigError("head: stacks must be in [2, 6], got " +
                      std::to_string(stacks));
  }
  if (channels < 1) throw ConfigError("head: channels must be >= 1");
  if (outputs && (outputs->num_classes < 1 || outputs->anchors < 1)) {
    throw ConfigError("head: num_classes and anchors must be >= 1");
  }
}

namespace {

HeadLayer make_layer(const HeadConfig& cfg, std::size_t levels, bool pyramid,
                     Rng& rng) {
  const std::size_t c = cfg.channels;
  PConvLayer base =
      pyramid ? PConvLayer::kaiming(c, c, rng)
              : PConvLayer::single_scale(Conv2dKernel::kaiming(c, c, 3, 1, rng));
  HeadLayer layer{SepcLayer::from(std::move(base)), false, std::nullopt};
  if (cfg.bn_mode) layer.bn = BNState::make(*cfg.bn_mode, c, levels);
  return layer;
}

void init_branch_tail(const HeadConfig& cfg, std::size_t levels,
                      std::size_t out_channels, HeadBranch& b, Rng& rng) {
  if (cfg.extra_conv) b.extra = make_layer(cfg, levels, false, rng);
  if (cfg.outputs) {
    b.output = Conv2dKernel::kaiming(out_channels, cfg.channels, 3, 1, rng,
                                     /*with_bias=*/true);
  }
}

void set_deformable(std::vector<HeadLayer>& layers, bool on) {
  for (HeadLayer& l : layers) l.deformable = on;
}

template <typename Fn>
void visit_kernel(Conv2dKernel& k, Fn&& fn) {
  fn(k.weights.data());
  if (k.bias) fn(std::span<double>(*k.bias));
}

template <typename Fn>
void visit_layer(HeadLayer& l, Fn&& fn) {
  PConvLayer& b = l.conv.base;
  if (b.w_up) visit_kernel(*b.w_up, fn);
  visit_kernel(b.w_same, fn);
  if (b.w_down) visit_kernel(*b.w_down, fn);
  OffsetPredictors& o = l.conv.offsets;
  if (o.up) visit_kernel(*o.up, fn);
  visit_kernel(o.same, fn);
  if (o.down) visit_kernel(*o.down, fn);
  if (l.bn) {
    for (auto& g : l.bn->gamma) fn(std::span<double>(g));
    for (auto& g : l.bn->beta) fn(std::span<double>(g));
  }
}

template <typename Fn>
void visit_branch(HeadBranch& b, Fn&& fn) {
  for (HeadLayer& l : b.stacks) visit_layer(l, fn);
  if (b.extra) visit_layer(*b.extra, fn);
  if (b.output) visit_kernel(*b.output, fn);
}

template <typename Fn>
void visit_params(HeadParams& p, Fn&& fn) {
  for (HeadLayer& l : p.shared) visit_layer(l, fn);
  visit_branch(p.cls, fn);
  visit_branch(p.loc, fn);
}

struct LayerTape {
  FeaturePyramid input;
  std::optional<BNCache> bn;
  FeaturePyramid pre_relu;
};

FeaturePyramid layer_forward(const FeaturePyramid& x, HeadLayer& layer,
                             std::vector<LayerTape>* tape) {
  FeaturePyramid y = layer.deformable ? sepc_forward(x, layer.conv)
                                      : pconv_forward(x, layer.conv.base);
  std::optional<BNCache> cache;
  if (layer.bn) {
    BNForward f = bn_forward_cached(y, *layer.bn);
    y = std::move(f.out);
    cache = std::move(f.cache);
  }
  FeaturePyramid out = relu(y);
  if (tape) tape->push_back({x, std::move(cache), std::move(y)});
  return out;
}

void add_kernel_grad(Conv2dKernel& dst, const KernelGrad& g) {
  dst.weights += g.weights;
  if (dst.bias && g.bias) {
    for (std::size_t i = 0; i < dst.bias->size(); ++i) {
      (*dst.bias)[i] += (*g.bias)[i];
    }
  }
}

void add_kernel_grad(Conv2dKernel& dst, const GradTriple& g) {
  add_kernel_grad(dst, KernelGrad{g.grad_weights, g.grad_bias});
}

void add_pconv_grads(PConvLayer& dst, const PConvGrads& g) {
  add_kernel_grad(dst.w_same, g.w_same);
  if (dst.w_up && g.w_up) add_kernel_grad(*dst.w_up, *g.w_up);
  if (dst.w_down && g.w_down) add_kernel_grad(*dst.w_down, *g.w_down);
}

FeaturePyramid layer_backward(const LayerTape& t, const HeadLayer& layer,
                              HeadLayer& grad, const FeaturePyramid& g_out) {
  FeaturePyramid g = relu_vjp(t.pre_relu, g_out);
  if (layer.bn) {
    BNGrads bg = bn_vjp(*t.bn, *layer.bn, g);
    for (std::size_t i = 0; i < bg.grad_gamma.size(); ++i) {
      for (std::size_t c = 0; c < bg.grad_gamma[i].size(); ++c) {
        grad.bn->gamma[i][c] += bg.grad_gamma[i][c];
        grad.bn->beta[i][c] += bg.grad_beta[i][c];
      }
    }
    g = std::move(bg.grad_input);
  }
  if (layer.deformable) {
    SepcVjp v = sepc_vjp(t.input, layer.conv, g);
    add_pconv_grads(grad.conv.base, v.grad_layer.base);
    OffsetPredictors& o = grad.conv.offsets;
    add_kernel_grad(o.same, v.grad_layer.same);
    if (o.up && v.grad_layer.up) add_kernel_grad(*o.up, *v.grad_layer.up);
    if (o.down && v.grad_layer.down) {
      add_kernel_grad(*o.down, *v.grad_layer.down);
    }
    return std::move(v.grad_input);
  }
  PConvVjp v = pconv_vjp(t.input, layer.conv.base, g);
  add_pconv_grads(grad.conv.base, v.grad_layer);
  return std::move(v.grad_input);
}

FeaturePyramid output_forward(const FeaturePyramid& x, const Conv2dKernel& k) {
  FeaturePyramid y;
  y.first_level = x.first_level;
  for (const Tensor& level : x.levels) y.levels.push_back(conv2d(level, k));
  return y;
}

struct BranchTape {
  std::vector<LayerTape> layers;  // stacks then extra
  FeaturePyramid pre_output;
};

FeaturePyramid branch_forward(const FeaturePyramid& x, HeadBranch& b,
                              BranchTape* tape) {
  std::vector<LayerTape>* lt = tape ? &tape->layers : nullptr;
  FeaturePyramid y = x;
  for (HeadLayer& l : b.stacks) y = layer_forward(y, l, lt);
  if (b.extra) y = layer_forward(y, *b.extra, lt);
  if (!b.output) return y;
  if (tape) tape->pre_output = y;
  return output_forward(y, *b.output);
}

FeaturePyramid branch_backward(const BranchTape& t, const HeadBranch& b,
                               HeadBranch& grad, const FeaturePyramid& g_out) {
  FeaturePyramid g = g_out;
  if (b.output) {
    FeaturePyramid gi;
    gi.first_level = g.first_level;
    for (std::size_t l = 0; l < g.size(); ++l) {
      GradTriple v = conv2d_vjp(t.pre_output[l], *b.output, g[l]);
      add_kernel_grad(*grad.output, v);
      gi.levels.push_back(std::move(v.grad_input));
    }
    g = std::move(gi);
  }
  std::size_t i = t.layers.size();
  if (b.extra) g = layer_backward(t.layers[--i], *b.extra, *grad.extra, g);
  for (std::size_t s = b.stacks.size(); s-- > 0;) {
    g = layer_backward(t.layers[--i], b.stacks[s], grad.stacks[s], g);
  }
  return g;
}

void check_input(const FeaturePyramid& p, const HeadConfig& cfg) {
  cfg.validate();
  p.validate();
  if (p.channels() != cfg.channels) {
    throw ShapeError("head: shape mismatch on axis c: pyramid has " +
                     std::to_string(p.channels()) + " channels, config has " +
                     std::to_string(cfg.channels));
  }
}

}  // namespace

HeadParams init_head(const HeadConfig& cfg, std::size_t levels) {
  cfg.validate();
  if (levels < 1) throw DomainError("head: levels must be >= 1");
  Rng rng(cfg.seed);
  HeadParams p;
  if (cfg.combined) {
    for (std::size_t s = 0; s < cfg.stacks; ++s) {
      p.shared.push_back(make_layer(cfg, levels, cfg.pyramid_conv, rng));
    }
  } else {
    for (HeadBranch* b : {&p.cls, &p.loc}) {
      for (std::size_t s = 0; s < cfg.stacks; ++s) {
        b->stacks.push_back(make_layer(cfg, levels, cfg.pyramid_conv, rng));
      }
    }
  }
  const std::size_t k = cfg.outputs ? cfg.outputs->anchors : 0;
  const std::size_t classes = cfg.outputs ? cfg.outputs->num_classes : 0;
  init_branch_tail(cfg, levels, k * classes, p.cls, rng);
  init_branch_tail(cfg, levels, 4 * k, p.loc, rng);
  build_head_variant(cfg, p);
  return p;
}

void build_head_variant(const HeadConfig& cfg, HeadParams& params) {
  const bool stacks = cfg.sepc_variant == SepcVariant::kFull;
  const bool extra = cfg.sepc_variant != SepcVariant::kNone;
  set_deformable(params.shared, stacks);
  for (HeadBranch* b : {&params.cls, &params.loc}) {
    set_deformable(b->stacks, stacks);
    if (b->extra) b->extra->deformable = extra;
  }
}

HeadParams zeros_like(const HeadParams& params) {
  HeadParams z = params;
  visit_params(z, [](std::span<double> s) {
    for (double& v : s) v = 0.0;
  });
  return z;
}

void for_each_parameter(HeadParams& params,
                        const std::function<void(std::span<double>)>& fn) {
  visit_params(params, fn);
}

std::size_t parameter_count(const HeadParams& params) {
  std::size_t n = 0;
  HeadParams& p = const_cast<HeadParams&>(params);
  visit_params(p, [&](std::span<double> s) { n += s.size(); });
  return n;
}

std::vector<double> flatten_parameters(const HeadParams& params) {
  std::vector<double> out;
  out.reserve(parameter_count(params));
  HeadParams& p = const_cast<HeadParams&>(params);
  visit_params(p, [&](std::span<double> s) {
    out.insert(out.end(), s.begin(), s.end());
  });
  return out;
}

void assign_parameters(HeadParams& params, std::span<const double> values) {
  if (values.size() != parameter_count(params)) {
    throw ShapeError("head: parameter vector has " +
                     std::to_string(values.size()) + " values, expected " +
                     std::to_string(parameter_count(params)));
  }
  std::size_t i = 0;
  visit_params(params, [&](std::span<double> s) {
    for (double& v : s) v = values[i++];
  });
}

HeadResult head_forward(const FeaturePyramid& p, const HeadConfig& cfg,
                        HeadParams& params) {
  check_input(p, cfg);
  FeaturePyramid x = p;
  for (HeadLayer& l : params.shared) x = layer_forward(x, l, nullptr);
  return {branch_forward(x, params.cls, nullptr),
          branch_forward(x, params.loc, nullptr)};
}

HeadGradients head_vjp(const FeaturePyramid& p, const HeadConfig& cfg,
                       HeadParams& params, const FeaturePyramid& grad_cls,
                       const FeaturePyramid& grad_loc) {
  check_input(p, cfg);
  std::vector<LayerTape> shared_tape;
  FeaturePyramid x = p;
  for (HeadLayer& l : params.shared) x = layer_forward(x, l, &shared_tape);
  BranchTape cls_tape;
  BranchTape loc_tape;
  const FeaturePyramid cls = branch_forward(x, params.cls, &cls_tape);
  const FeaturePyramid loc = branch_forward(x, params.loc, &loc_tape);
  require_same_shape(cls, grad_cls, "head_vjp grad_cls");
  require_same_shape(loc, grad_loc, "head_vjp grad_loc");

  HeadGradients r{{}, zeros_like(params)};
  FeaturePyramid g =
      branch_backward(cls_tape, params.cls, r.grad_params.cls, grad_cls) +
      branch_backward(loc_tape, params.loc, r.grad_params.loc, grad_loc);
  for (std::size_t s = params.shared.size(); s-- > 0;) {
    g = layer_backward(shared_tape[s], params.shared[s],
                       r.grad_params.shared[s], g);
  }
  r.grad_input = std::move(g);
  return r;
}

}  // namespace sepc
