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

#include "sepc/deform_conv.hpp"

#include <cmath>
#include <string>

#include "sepc/error.hpp"

namespace sepc {
namespace {

struct Cell {
  bool inside = false;
  std::ptrdiff_t y0 = 0;
  std::ptrdiff_t x0 = 0;
  double ly = 0.0;
  double lx = 0.0;
};

Cell locate(std::size_t h, std::size_t w, double y, double x) {
  Cell cell;
  const auto hh = static_cast<double>(h);
  const auto ww = static_cast<double>(w);
  if (!(y > -1.0) || !(y < hh) || !(x > -1.0) || !(x < ww)) return cell;
  cell.inside = true;
  const double fy = std::floor(y);
  const double fx = std::floor(x);
  cell.y0 = static_cast<std::ptrdiff_t>(fy);
  cell.x0 = static_cast<std::ptrdiff_t>(fx);
  cell.ly = y - fy;
  cell.lx = x - fx;
  return cell;
}

struct Corners {
  double v00 = 0.0;
  double v01 = 0.0;
  double v10 = 0.0;
  double v11 = 0.0;
};

Corners read_corners(const double* plane, std::size_t h, std::size_t w,
                     const Cell& cell) {
  const auto hh = static_cast<std::ptrdiff_t>(h);
  const auto ww = static_cast<std::ptrdiff_t>(w);
  auto at = [&](std::ptrdiff_t y, std::ptrdiff_t x) {
    if (y < 0 || y >= hh || x < 0 || x >= ww) return 0.0;
    return plane[y * ww + x];
  };
  return {at(cell.y0, cell.x0), at(cell.y0, cell.x0 + 1),
          at(cell.y0 + 1, cell.x0), at(cell.y0 + 1, cell.x0 + 1)};
}

double interpolate(const Corners& v, const Cell& cell) {
  const double hy = 1.0 - cell.ly;
  const double hx = 1.0 - cell.lx;
  return hy * hx * v.v00 + hy * cell.lx * v.v01 + cell.ly * hx * v.v10 +
         cell.ly * cell.lx * v.v11;
}

double sample_plane(const double* plane, std::size_t h, std::size_t w,
                    double y, double x) {
  const Cell cell = locate(h, w, y, x);
  if (!cell.inside) return 0.0;
  return interpolate(read_corners(plane, h, w, cell), cell);
}

// Returns d/d(y, x) of the sample scaled by g and scatters g * corner weights
// into grad_plane.
BilinearGrad sample_plane_vjp(const double* plane, double* grad_plane,
                              std::size_t h, std::size_t w, double y, double x,
                              double g) {
  const Cell cell = locate(h, w, y, x);
  if (!cell.inside) return {};
  const Corners v = read_corners(plane, h, w, cell);
  const double hy = 1.0 - cell.ly;
  const double hx = 1.0 - cell.lx;
  const auto hh = static_cast<std::ptrdiff_t>(h);
  const auto ww = static_cast<std::ptrdiff_t>(w);
  auto scatter = [&](std::ptrdiff_t yy, std::ptrdiff_t xx, double weight) {
    if (yy < 0 || yy >= hh || xx < 0 || xx >= ww) return;
    grad_plane[yy * ww + xx] += g * weight;
  };
  scatter(cell.y0, cell.x0, hy * hx);
  scatter(cell.y0, cell.x0 + 1, hy * cell.lx);
  scatter(cell.y0 + 1, cell.x0, cell.ly * hx);
  scatter(cell.y0 + 1, cell.x0 + 1, cell.ly * cell.lx);
  BilinearGrad d;
  d.dy = g * (hx * (v.v10 - v.v00) + cell.lx * (v.v11 - v.v01));
  d.dx = g * (hy * (v.v01 - v.v00) + cell.ly * (v.v11 - v.v10));
  return d;
}

void check_plane_index(const Tensor& x, std::size_t n, std::size_t c) {
  if (n >= x.n() || c >= x.c()) {
    throw ShapeError("bilinear_sample: plane (" + std::to_string(n) + ", " +
                     std::to_string(c) + ") outside " + to_string(x.shape()));
  }
}

void check_offsets(const Tensor& x, const Conv2dKernel& k,
                   const Tensor& offsets) {
  const Shape expect = offset_field_shape(x.shape(), k);
  if (offsets.shape() != expect) {
    require_same_shape(offsets, Tensor(expect), "deform_conv2d offsets");
  }
}

// Sampled input values, laid out (c_in, kh * kw, H_out * W_out) for one batch
// item.
std::vector<double> gather_columns(const Tensor& x, const Conv2dKernel& k,
                                   const Tensor& offsets, std::size_t n,
                                   const Shape& os) {
  const std::size_t taps = k.kh() * k.kw();
  const std::size_t positions = os.h * os.w;
  std::vector<double> cols(x.c() * taps * positions);
  const auto s = static_cast<double>(k.stride);
  const auto p = static_cast<double>(k.padding);
  for (std::size_t ci = 0; ci < x.c(); ++ci) {
    const double* plane = x.plane(n, ci);
    for (std::size_t t = 0; t < taps; ++t) {
      const auto ky = static_cast<double>(t / k.kw());
      const auto kx = static_cast<double>(t % k.kw());
      const double* dy = offsets.plane(n, 2 * t);
      const double* dx = offsets.plane(n, 2 * t + 1);
      double* col = cols.data() + (ci * taps + t) * positions;
      for (std::size_t oy = 0; oy < os.h; ++oy) {
        for (std::size_t ox = 0; ox < os.w; ++ox) {
          const std::size_t pos = oy * os.w + ox;
          const double y = static_cast<double>(oy) * s - p + ky + dy[pos];
          const double xx = static_cast<double>(ox) * s - p + kx + dx[pos];
          col[pos] = sample_plane(plane, x.h(), x.w(), y, xx);
        }
      }
    }
  }
  return cols;
}

}  // namespace

double bilinear_sample(const Tensor& x, std::size_t n, std::size_t c, double y,
                       double xc) {
  check_plane_index(x, n, c);
  return sample_plane(x.plane(n, c), x.h(), x.w(), y, xc);
}

BilinearGrad bilinear_sample_vjp(const Tensor& x, std::size_t n, std::size_t c,
                                 double y, double xc, double g,
                                 Tensor& grad_input) {
  check_plane_index(x, n, c);
  require_same_shape(x, grad_input, "bilinear_sample_vjp");
  return sample_plane_vjp(x.plane(n, c), grad_input.plane(n, c), x.h(), x.w(),
                          y, xc, g);
}

Shape offset_field_shape(const Shape& x, const Conv2dKernel& k) {
  const Shape os = conv2d_output_shape(x, k);
  return Shape{x.n, 2 * k.kh() * k.kw(), os.h, os.w};
}

Tensor deform_conv2d(const Tensor& x, const Conv2dKernel& k,
                     const Tensor& offsets) {
  const Shape os = conv2d_output_shape(x.shape(), k);
  check_offsets(x, k, offsets);
  const std::size_t taps = k.kh() * k.kw();
  const std::size_t positions = os.h * os.w;
  Tensor out(os);
  for (std::size_t n = 0; n < os.n; ++n) {
    const std::vector<double> cols = gather_columns(x, k, offsets, n, os);
    for (std::size_t co = 0; co < os.c; ++co) {
      double* dst = out.plane(n, co);
      // Same per-element order as conv2d: ci, then ky, then kx.
      for (std::size_t ci = 0; ci < x.c(); ++ci) {
        for (std::size_t t = 0; t < taps; ++t) {
          const double wv = k.weights(co, ci, t / k.kw(), t % k.kw());
          const double* col = cols.data() + (ci * taps + t) * positions;
          for (std::size_t pos = 0; pos < positions; ++pos) {
            dst[pos] += wv * col[pos];
          }
        }
      }
      if (k.bias) {
        const double b = (*k.bias)[co];
        for (std::size_t pos = 0; pos < positions; ++pos) dst[pos] += b;
      }
    }
  }
  return out;
}

DeformGrads deform_conv2d_vjp(const Tensor& x, const Conv2dKernel& k,
                              const Tensor& offsets, const Tensor& grad_out) {
  const Shape os = conv2d_output_shape(x.shape(), k);
  check_offsets(x, k, offsets);
  if (grad_out.shape() != os) {
    require_same_shape(grad_out, Tensor(os), "deform_conv2d_vjp grad_out");
  }
  const std::size_t taps = k.kh() * k.kw();
  const std::size_t positions = os.h * os.w;
  DeformGrads g{Tensor::zeros_like(x), Tensor::zeros_like(k.weights),
                std::nullopt, Tensor::zeros_like(offsets)};
  const auto s = static_cast<double>(k.stride);
  const auto p = static_cast<double>(k.padding);
  std::vector<double> grad_cols(x.c() * taps * positions);
  for (std::size_t n = 0; n < os.n; ++n) {
    const std::vector<double> cols = gather_columns(x, k, offsets, n, os);
    std::fill(grad_cols.begin(), grad_cols.end(), 0.0);
    for (std::size_t co = 0; co < os.c; ++co) {
      const double* go = grad_out.plane(n, co);
      for (std::size_t ci = 0; ci < x.c(); ++ci) {
        for (std::size_t t = 0; t < taps; ++t) {
          const std::size_t ky = t / k.kw();
          const std::size_t kx = t % k.kw();
          const double wv = k.weights(co, ci, ky, kx);
          const std::size_t base = (ci * taps + t) * positions;
          double gw = 0.0;
          for (std::size_t pos = 0; pos < positions; ++pos) {
            gw += go[pos] * cols[base + pos];
            grad_cols[base + pos] += wv * go[pos];
          }
          g.grad_weights(co, ci, ky, kx) += gw;
        }
      }
    }
    for (std::size_t ci = 0; ci < x.c(); ++ci) {
      const double* plane = x.plane(n, ci);
      double* gplane = g.grad_input.plane(n, ci);
      for (std::size_t t = 0; t < taps; ++t) {
        const auto ky = static_cast<double>(t / k.kw());
        const auto kx = static_cast<double>(t % k.kw());
        const double* dy = offsets.plane(n, 2 * t);
        const double* dx = offsets.plane(n, 2 * t + 1);
        double* gdy = g.grad_offsets.plane(n, 2 * t);
        double* gdx = g.grad_offsets.plane(n, 2 * t + 1);
        const double* gcol = grad_cols.data() + (ci * taps + t) * positions;
        for (std::size_t oy = 0; oy < os.h; ++oy) {
          for (std::size_t ox = 0; ox < os.w; ++ox) {
            const std::size_t pos = oy * os.w + ox;
            const double y = static_cast<double>(oy) * s - p + ky + dy[pos];
            const double xx = static_cast<double>(ox) * s - p + kx + dx[pos];
            const BilinearGrad d = sample_plane_vjp(plane, gplane, x.h(), x.w(),
                                                    y, xx, gcol[pos]);
            gdy[pos] += d.dy;
            gdx[pos] += d.dx;
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
        for (std::size_t pos = 0; pos < positions; ++pos) gb[co] += go[pos];
      }
    }
    g.grad_bias = std::move(gb);
  }
  return g;
}

}  // namespace sepc
