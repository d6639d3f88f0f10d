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

#include "sepc/scale_space.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sepc/error.hpp"
#include "sepc/random.hpp"

namespace sepc {
namespace {

void require_scale(double t, const char* what) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw DomainError(std::string(what) + ": scale must be finite and >= 0, got " +
                      std::to_string(t));
  }
}

void require_divisible(const Tensor& x, std::size_t factor, const char* what) {
  if (x.h() % factor != 0 || x.w() % factor != 0) {
    throw DivisibilityError(std::string(what) + ": spatial dims " +
                            std::to_string(x.h()) + "x" +
                            std::to_string(x.w()) + " not divisible by " +
                            std::to_string(factor));
  }
}

std::size_t pow2(std::size_t n) { return std::size_t{1} << n; }

// Zero-padded 1-D correlation along rows (horizontal) or columns.
Tensor blur_axis(const Tensor& x, const std::vector<double>& k,
                 bool horizontal) {
  const auto r = static_cast<std::ptrdiff_t>(k.size() / 2);
  Tensor out(x.shape());
  const auto h = static_cast<std::ptrdiff_t>(x.h());
  const auto w = static_cast<std::ptrdiff_t>(x.w());
  for (std::size_t n = 0; n < x.n(); ++n) {
    for (std::size_t c = 0; c < x.c(); ++c) {
      const double* src = x.plane(n, c);
      double* dst = out.plane(n, c);
      for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t xx = 0; xx < w; ++xx) {
          double acc = 0.0;
          for (std::ptrdiff_t u = -r; u <= r; ++u) {
            const std::ptrdiff_t sy = horizontal ? y : y + u;
            const std::ptrdiff_t sx = horizontal ? xx + u : xx;
            if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
            acc += k[static_cast<std::size_t>(u + r)] * src[sy * w + sx];
          }
          dst[y * w + xx] = acc;
        }
      }
    }
  }
  return out;
}

}  // namespace

void GaussianPyramidSpec::validate() const {
  if (!(s0 > 0.0) || !std::isfinite(s0)) {
    throw DomainError("gaussian pyramid: s0 must be > 0");
  }
  if (levels < 1) throw DomainError("gaussian pyramid: levels must be >= 1");
}

double scale_for_ratio(double a, double s0) {
  if (!(a > 0.0) || a > 1.0) {
    throw DomainError("scale_for_ratio: ratio must lie in (0, 1], got " +
                      std::to_string(a));
  }
  if (!(s0 > 0.0)) throw DomainError("scale_for_ratio: s0 must be > 0");
  return s0 / (a * a) - s0;
}

std::size_t blur_radius(double t) {
  require_scale(t, "blur_radius");
  if (t == 0.0) return 0;
  const auto r = static_cast<std::size_t>(std::ceil(4.0 * std::sqrt(2.0 * t)));
  return std::max<std::size_t>(r, 1);
}

std::vector<double> gaussian_kernel_1d(double t, std::size_t radius) {
  require_scale(t, "gaussian_kernel_1d");
  std::vector<double> k(2 * radius + 1, 0.0);
  if (t == 0.0) {
    k[radius] = 1.0;
    return k;
  }
  if (radius < 1) throw DomainError("gaussian_kernel_1d: radius must be >= 1");
  double total = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double u = static_cast<double>(i) - static_cast<double>(radius);
    k[i] = std::exp(-u * u / (4.0 * t));
    total += k[i];
  }
  for (double& v : k) v /= total;
  return k;
}

GaussianKernel2D gaussian_kernel(double t, std::size_t radius) {
  require_scale(t, "gaussian_kernel");
  if (t > 0.0 && radius < 1) {
    throw DomainError("gaussian_kernel: radius must be >= 1 when t > 0");
  }
  GaussianKernel2D g;
  g.t = t;
  g.radius = radius;
  const std::size_t e = g.extent();
  g.weights.assign(e * e, 0.0);
  if (t == 0.0) {
    g.weights[radius * e + radius] = 1.0;
    return g;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < e; ++i) {
    for (std::size_t j = 0; j < e; ++j) {
      const double dy = static_cast<double>(i) - static_cast<double>(radius);
      const double dx = static_cast<double>(j) - static_cast<double>(radius);
      const double v = std::exp(-(dy * dy + dx * dx) / (4.0 * t));
      g.weights[i * e + j] = v;
      total += v;
    }
  }
  for (double& v : g.weights) v /= total;
  return g;
}

Tensor gaussian_blur(const Tensor& x, double t) {
  require_scale(t, "gaussian_blur");
  if (t == 0.0) return x;
  const std::vector<double> k = gaussian_kernel_1d(t, blur_radius(t));
  return blur_axis(blur_axis(x, k, true), k, false);
}

Tensor gaussian_blur_2d(const Tensor& x, double t) {
  require_scale(t, "gaussian_blur_2d");
  if (t == 0.0) return x;
  const GaussianKernel2D g = gaussian_kernel(t, blur_radius(t));
  const auto r = static_cast<std::ptrdiff_t>(g.radius);
  const auto h = static_cast<std::ptrdiff_t>(x.h());
  const auto w = static_cast<std::ptrdiff_t>(x.w());
  Tensor out(x.shape());
  for (std::size_t n = 0; n < x.n(); ++n) {
    for (std::size_t c = 0; c < x.c(); ++c) {
      const double* src = x.plane(n, c);
      double* dst = out.plane(n, c);
      for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t xx = 0; xx < w; ++xx) {
          double acc = 0.0;
          for (std::ptrdiff_t dy = -r; dy <= r; ++dy) {
            for (std::ptrdiff_t dx = -r; dx <= r; ++dx) {
              const std::ptrdiff_t sy = y + dy;
              const std::ptrdiff_t sx = xx + dx;
              if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
              acc += g.at(dy, dx) * src[sy * w + sx];
            }
          }
          dst[y * w + xx] = acc;
        }
      }
    }
  }
  return out;
}

Tensor jump(const Tensor& x, std::size_t n, double s0) {
  if (n == 0) return x;
  const std::size_t factor = pow2(n);
  require_divisible(x, factor, "jump");
  const double t = scale_for_ratio(1.0 / static_cast<double>(factor), s0);
  return subsample(gaussian_blur(x, t), factor);
}

GaussianPyramid build_gaussian_pyramid(const Tensor& x,
                                       const GaussianPyramidSpec& spec) {
  spec.validate();
  require_divisible(x, pow2(spec.levels - 1), "build_gaussian_pyramid");
  GaussianPyramid p;
  p.spec = spec;
  p.levels.reserve(spec.levels);
  for (std::size_t l = 0; l < spec.levels; ++l) {
    p.levels.push_back(jump(x, l, spec.s0));
  }
  return p;
}

std::size_t lemma_border(std::size_t m, std::size_t n, double s0) {
  auto ceil_div = [](std::size_t a, std::size_t b) { return (a + b - 1) / b; };
  auto radius_for = [s0](std::size_t k) {
    return blur_radius(scale_for_ratio(1.0 / static_cast<double>(pow2(k)), s0));
  };
  const std::size_t direct = ceil_div(radius_for(m + n), pow2(m + n));
  const std::size_t mid = ceil_div(radius_for(n), pow2(n)) + radius_for(m);
  const std::size_t chained = ceil_div(mid, pow2(m));
  return std::max(direct, chained);
}

double verify_lemma1(const Tensor& x, std::size_t m, std::size_t n, double s0) {
  require_divisible(x, pow2(m + n), "verify_lemma1");
  if (m == 0 || n == 0) return 0.0;
  const Tensor chained = jump(jump(x, n, s0), m, s0);
  const Tensor direct = jump(x, m + n, s0);
  const InteriorNorms norms =
      interior_norms(chained, direct, lemma_border(m, n, s0));
  if (norms.reference == 0.0) return norms.diff;
  return norms.diff / norms.reference;
}

Tensor band_limited_noise(Shape shape, std::uint64_t seed, double pre_blur) {
  Rng rng(seed);
  return gaussian_blur(random_uniform(shape, rng, -1.0, 1.0), pre_blur);
}

InteriorNorms interior_norms(const Tensor& x, const Tensor& y,
                             std::size_t border) {
  require_same_shape(x, y, "interior_norms");
  if (2 * border >= x.h() || 2 * border >= x.w()) {
    throw DegenerateOutputError("interior region is empty: border " +
                                std::to_string(border) + " on " +
                                to_string(x.shape()));
  }
  double d2 = 0.0;
  double r2 = 0.0;
  for (std::size_t n = 0; n < x.n(); ++n) {
    for (std::size_t c = 0; c < x.c(); ++c) {
      for (std::size_t i = border; i < x.h() - border; ++i) {
        for (std::size_t j = border; j < x.w() - border; ++j) {
          const double d = x(n, c, i, j) - y(n, c, i, j);
          d2 += d * d;
          r2 += y(n, c, i, j) * y(n, c, i, j);
        }
      }
    }
  }
  return {std::sqrt(d2), std::sqrt(r2)};
}

double interior_max_abs_diff(const Tensor& x, const Tensor& y,
                             std::size_t border) {
  require_same_shape(x, y, "interior_max_abs_diff");
  if (2 * border >= x.h() || 2 * border >= x.w()) {
    throw DegenerateOutputError("interior region is empty");
  }
  double m = 0.0;
  for (std::size_t n = 0; n < x.n(); ++n) {
    for (std::size_t c = 0; c < x.c(); ++c) {
      for (std::size_t i = border; i < x.h() - border; ++i) {
        for (std::size_t j = border; j < x.w() - border; ++j) {
          m = std::max(m, std::abs(x(n, c, i, j) - y(n, c, i, j)));
        }
      }
    }
  }
  return m;
}

double interior_total_variation(const Tensor& x, std::size_t border) {
  if (2 * border + 1 >= x.h() || 2 * border + 1 >= x.w()) {
    throw DegenerateOutputError("interior region is empty");
  }
  double tv = 0.0;
  for (std::size_t n = 0; n < x.n(); ++n) {
    for (std::size_t c = 0; c < x.c(); ++c) {
      for (std::size_t i = border; i < x.h() - border - 1; ++i) {
        for (std::size_t j = border; j < x.w() - border - 1; ++j) {
          tv += std::abs(x(n, c, i, j + 1) - x(n, c, i, j));
          tv += std::abs(x(n, c, i + 1, j) - x(n, c, i, j));
        }
      }
    }
  }
  return tv;
}

}  // namespace sepc
