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

#include "sepc/batch_norm.hpp"

#include <cmath>
#include <string>

#include "sepc/error.hpp"

namespace sepc {

std::string_view to_string(BNMode mode) {
  switch (mode) {
    case BNMode::kSingle:
      return "single";
    case BNMode::kIndependent:
      return "independent";
    case BNMode::kIntegrated:
      return "integrated";
  }
  return "?";
}

BNMode parse_bn_mode(std::string_view s) {
  if (s == "single") return BNMode::kSingle;
  if (s == "independent") return BNMode::kIndependent;
  if (s == "integrated") return BNMode::kIntegrated;
  throw ConfigError("unknown bn mode '" + std::string(s) + "'");
}

BNState BNState::make(BNMode mode, std::size_t channels, std::size_t levels) {
  if (channels < 1 || levels < 1) {
    throw DomainError("bn: channels and levels must be >= 1");
  }
  BNState s;
  s.mode = mode;
  const std::size_t params = mode == BNMode::kIndependent ? levels : 1;
  const std::size_t stats = mode == BNMode::kIntegrated ? 1 : levels;
  s.gamma.assign(params, std::vector<double>(channels, 1.0));
  s.beta.assign(params, std::vector<double>(channels, 0.0));
  s.running_mean.assign(stats, std::vector<double>(channels, 0.0));
  s.running_var.assign(stats, std::vector<double>(channels, 1.0));
  return s;
}

std::size_t BNState::param_group(std::size_t level) const {
  return mode == BNMode::kIndependent ? level : 0;
}

std::size_t BNState::stat_group(std::size_t level) const {
  return mode == BNMode::kIntegrated ? 0 : level;
}

void BNState::validate(const FeaturePyramid& p) const {
  p.validate();
  if (gamma.empty() || beta.size() != gamma.size() || running_mean.empty() ||
      running_var.size() != running_mean.size()) {
    throw DomainError("bn: inconsistent state");
  }
  const std::size_t c = channels();
  if (p.channels() != c) {
    throw ShapeError("bn: shape mismatch on axis c: pyramid has " +
                     std::to_string(p.channels()) + " channels, state has " +
                     std::to_string(c));
  }
  const std::size_t params = mode == BNMode::kIndependent ? p.size() : 1;
  const std::size_t stats = mode == BNMode::kIntegrated ? 1 : p.size();
  if (gamma.size() != params || running_mean.size() != stats) {
    throw ShapeError("bn: state was built for a different level count");
  }
  for (const auto* group : {&gamma, &beta, &running_mean, &running_var}) {
    for (const auto& v : *group) {
      if (v.size() != c) throw ShapeError("bn: per-channel vector length");
    }
  }
  for (const auto& v : running_var) {
    for (double x : v) {
      if (!(x >= 0.0)) throw DomainError("bn: running_var must be >= 0");
    }
  }
  if (!(eps >= 0.0)) throw DomainError("bn: eps must be >= 0");
}

namespace {

// Levels that share one set of statistics.
std::vector<std::vector<std::size_t>> stat_groups(BNMode mode,
                                                  std::size_t levels) {
  std::vector<std::vector<std::size_t>> groups;
  if (mode == BNMode::kIntegrated) {
    groups.emplace_back();
    for (std::size_t l = 0; l < levels; ++l) groups[0].push_back(l);
  } else {
    for (std::size_t l = 0; l < levels; ++l) groups.push_back({l});
  }
  return groups;
}

// Per-channel sums over a statistics group. Deviations are taken in the
// scaled form u = N x - S, which is exact whenever N x and S are, so inputs
// with a non-representable mean still normalize exactly.
struct GroupSums {
  std::vector<double> sum;     // S
  std::vector<double> sum_u2;  // sum of (N x - S)^2
  double count = 0.0;          // N

  double mean(std::size_t ch) const { return sum[ch] / count; }
  double var(std::size_t ch) const {
    return sum_u2[ch] / (count * count * count);
  }
};

GroupSums group_sums(const FeaturePyramid& p,
                     const std::vector<std::size_t>& levels) {
  const std::size_t c = p.channels();
  GroupSums g{std::vector<double>(c, 0.0), std::vector<double>(c, 0.0), 0.0};
  for (std::size_t l : levels) {
    const Tensor& x = p[l];
    g.count += static_cast<double>(x.n() * x.h() * x.w());
    for (std::size_t n = 0; n < x.n(); ++n) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double* plane = x.plane(n, ch);
        for (std::size_t i = 0; i < x.h() * x.w(); ++i) g.sum[ch] += plane[i];
      }
    }
  }
  for (std::size_t l : levels) {
    const Tensor& x = p[l];
    for (std::size_t n = 0; n < x.n(); ++n) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double* plane = x.plane(n, ch);
        for (std::size_t i = 0; i < x.h() * x.w(); ++i) {
          const double u = g.count * plane[i] - g.sum[ch];
          g.sum_u2[ch] += u * u;
        }
      }
    }
  }
  return g;
}

ChannelMoments moments_of(const GroupSums& g) {
  ChannelMoments m;
  for (std::size_t ch = 0; ch < g.sum.size(); ++ch) {
    m.mean.push_back(g.mean(ch));
    m.var.push_back(g.var(ch));
  }
  return m;
}

}  // namespace

ChannelMoments ibn_statistics(const FeaturePyramid& p) {
  p.validate();
  std::vector<std::size_t> all(p.size());
  for (std::size_t l = 0; l < p.size(); ++l) all[l] = l;
  return moments_of(group_sums(p, all));
}

ChannelMoments channel_moments(const Tensor& x) {
  return ibn_statistics(FeaturePyramid({x}));
}

BNForward bn_forward_cached(const FeaturePyramid& p, BNState& s) {
  s.validate(p);
  const std::size_t c = p.channels();
  const auto groups = stat_groups(s.mode, p.size());
  BNForward r;
  r.cache.batch_stats = s.training;
  r.cache.inv_std.resize(groups.size());
  r.cache.x_hat.levels.resize(p.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    // x_hat = (x - shift) * scale; training mode uses the scaled deviations
    // (N x - S) / sqrt(sum u^2 / N + eps N^2).
    std::vector<double> shift(c);
    std::vector<double> scale(c);
    double mul = 1.0;
    std::vector<double>& inv = r.cache.inv_std[g];
    inv.resize(c);
    if (s.training) {
      const GroupSums sums = group_sums(p, groups[g]);
      mul = sums.count;
      for (std::size_t ch = 0; ch < c; ++ch) {
        s.running_mean[g][ch] = (1.0 - s.momentum) * s.running_mean[g][ch] +
                                s.momentum * sums.mean(ch);
        s.running_var[g][ch] = (1.0 - s.momentum) * s.running_var[g][ch] +
                               s.momentum * sums.var(ch);
        shift[ch] = sums.sum[ch];
        scale[ch] = 1.0 / std::sqrt(sums.sum_u2[ch] / sums.count +
                                    s.eps * sums.count * sums.count);
        inv[ch] = scale[ch] * sums.count;
      }
    } else {
      for (std::size_t ch = 0; ch < c; ++ch) {
        shift[ch] = s.running_mean[g][ch];
        scale[ch] = 1.0 / std::sqrt(s.running_var[g][ch] + s.eps);
        inv[ch] = scale[ch];
      }
    }
    for (std::size_t l : groups[g]) {
      Tensor xh = p[l];
      for (std::size_t n = 0; n < xh.n(); ++n) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          double* plane = xh.plane(n, ch);
          for (std::size_t i = 0; i < xh.h() * xh.w(); ++i) {
            plane[i] = (mul * plane[i] - shift[ch]) * scale[ch];
          }
        }
      }
      r.cache.x_hat.levels[l] = std::move(xh);
    }
  }
  r.cache.x_hat.first_level = p.first_level;
  r.out = r.cache.x_hat;
  for (std::size_t l = 0; l < p.size(); ++l) {
    const auto& gamma = s.gamma[s.param_group(l)];
    const auto& beta = s.beta[s.param_group(l)];
    Tensor& y = r.out[l];
    for (std::size_t n = 0; n < y.n(); ++n) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        double* plane = y.plane(n, ch);
        for (std::size_t i = 0; i < y.h() * y.w(); ++i) {
          plane[i] = gamma[ch] * plane[i] + beta[ch];
        }
      }
    }
  }
  return r;
}

FeaturePyramid bn_forward(const FeaturePyramid& p, BNState& s) {
  return bn_forward_cached(p, s).out;
}

BNGrads bn_vjp(const BNCache& cache, const BNState& s,
               const FeaturePyramid& grad_out) {
  require_same_shape(cache.x_hat, grad_out, "bn_vjp");
  const std::size_t c = grad_out.channels();
  BNGrads r;
  r.grad_gamma.assign(s.gamma.size(), std::vector<double>(c, 0.0));
  r.grad_beta.assign(s.beta.size(), std::vector<double>(c, 0.0));
  r.grad_input = zeros_like(grad_out);
  const auto groups = stat_groups(s.mode, grad_out.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const std::vector<double>& inv = cache.inv_std[g];
    // Per-channel sums over the group of dxhat and dxhat * xhat.
    std::vector<double> sum_d(c, 0.0);
    std::vector<double> sum_dx(c, 0.0);
    std::vector<double> count(c, 0.0);
    for (std::size_t l : groups[g]) {
      const auto& gamma = s.gamma[s.param_group(l)];
      const Tensor& go = grad_out[l];
      const Tensor& xh = cache.x_hat[l];
      Tensor& gi = r.grad_input[l];
      auto& gg = r.grad_gamma[s.param_group(l)];
      auto& gb = r.grad_beta[s.param_group(l)];
      for (std::size_t n = 0; n < go.n(); ++n) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double* pg = go.plane(n, ch);
          const double* px = xh.plane(n, ch);
          double* pd = gi.plane(n, ch);
          for (std::size_t i = 0; i < go.h() * go.w(); ++i) {
            gg[ch] += pg[i] * px[i];
            gb[ch] += pg[i];
            pd[i] = pg[i] * gamma[ch];  // dL/dxhat, finished below
            sum_d[ch] += pd[i];
            sum_dx[ch] += pd[i] * px[i];
          }
          count[ch] += static_cast<double>(go.h() * go.w());
        }
      }
    }
    for (std::size_t l : groups[g]) {
      const Tensor& xh = cache.x_hat[l];
      Tensor& gi = r.grad_input[l];
      for (std::size_t n = 0; n < gi.n(); ++n) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double* px = xh.plane(n, ch);
          double* pd = gi.plane(n, ch);
          for (std::size_t i = 0; i < gi.h() * gi.w(); ++i) {
            if (cache.batch_stats) {
              pd[i] = inv[ch] *
                      (pd[i] - sum_d[ch] / count[ch] -
                       px[i] * sum_dx[ch] / count[ch]);
            } else {
              pd[i] *= inv[ch];
            }
          }
        }
      }
    }
  }
  return r;
}

}  // namespace sepc
