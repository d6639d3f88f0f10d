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

#include "sepc/flops.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

#include "sepc/error.hpp"

namespace sepc {

std::string_view to_string(SizeMode m) {
  return m == SizeMode::kCeil ? "ceil" : "fractional";
}

SizeMode parse_size_mode(std::string_view s) {
  if (s == "fractional") return SizeMode::kFractional;
  if (s == "ceil") return SizeMode::kCeil;
  throw ConfigError("unknown size mode '" + std::string(s) + "'");
}

void CostModelInput::validate() const {
  if (image_c < 1 || image_h < 1 || image_w < 1) {
    throw ConfigError("cost model: image dims must be >= 1");
  }
  if (levels < 1) throw ConfigError("cost model: levels must be >= 1");
  if (first_level + levels > 63) {
    throw ConfigError("cost model: strides exceed 2^62");
  }
  if (channels < 1) throw ConfigError("cost model: channels must be >= 1");
  if (kernel_h < 1 || kernel_w < 1 || kernel_h % 2 == 0 || kernel_w % 2 == 0) {
    throw ConfigError("cost model: kernel extents must be odd and >= 1");
  }
}

double flops_conv2d(double c_in, double k_h, double k_w, double h, double w,
                    double c_out) {
  return c_in * k_h * k_w * h * w * c_out;
}

double deform_overhead(double k_h, double k_w, double c_out) {
  if (!(c_out >= 1.0)) throw DomainError("flops: c_out must be >= 1");
  return (8.0 + 2.0 * k_h * k_w) / c_out;
}

double flops_deform_conv2d(double c_in, double k_h, double k_w, double h,
                           double w, double c_out) {
  return (1.0 + deform_overhead(k_h, k_w, c_out)) *
         flops_conv2d(c_in, k_h, k_w, h, w, c_out);
}

std::vector<LevelSize> level_sizes(const CostModelInput& inp) {
  inp.validate();
  std::vector<LevelSize> sizes;
  for (std::size_t i = 0; i < inp.levels; ++i) {
    const auto stride = static_cast<double>(std::uint64_t{1}
                                            << (inp.first_level + i));
    LevelSize s{static_cast<double>(inp.image_h) / stride,
                static_cast<double>(inp.image_w) / stride};
    if (inp.size_mode == SizeMode::kCeil) {
      s.h = std::ceil(s.h);
      s.w = std::ceil(s.w);
    }
    sizes.push_back(s);
  }
  return sizes;
}

std::vector<double> pyramid_area_ratios(const CostModelInput& inp) {
  const auto sizes = level_sizes(inp);
  double total = 0.0;
  for (const LevelSize& s : sizes) total += s.h * s.w;
  std::vector<double> r;
  for (const LevelSize& s : sizes) r.push_back(s.h * s.w / total);
  return r;
}

CostFactors pconv_cost_factors(const CostModelInput& inp) {
  const auto r = pyramid_area_ratios(inp);
  const std::size_t n = r.size();
  CostFactors f;
  if (n == 1) {
    f.c = {1.0};
    f.total = 1.0;
    return f;
  }
  const double up = inp.include_upsample
                        ? 7.0 / static_cast<double>(inp.channels * inp.kernel_h *
                                                    inp.kernel_w)
                        : 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    double c = 1.0;
    if (l > 0) c += 1.0;
    if (l + 1 < n) c += 0.25 + up;
    f.c.push_back(c);
    f.total += c * r[l];
  }
  return f;
}

double sepc_lite_overhead(const CostModelInput& inp) {
  const auto r = pyramid_area_ratios(inp);
  double above = 0.0;
  for (std::size_t l = 1; l < r.size(); ++l) above += r[l];
  return above * deform_overhead(static_cast<double>(inp.kernel_h),
                                 static_cast<double>(inp.kernel_w),
                                 static_cast<double>(inp.channels));
}

double head_flops_ratio(const HeadConfig& cfg, const CostModelInput& inp) {
  cfg.validate();
  const auto r = pyramid_area_ratios(inp);
  const CostFactors f = pconv_cost_factors(inp);
  const double stacks = static_cast<double>(cfg.stacks);
  const double stack_copies = cfg.combined ? 1.0 : 2.0;
  const double extras = cfg.extra_conv ? 2.0 : 0.0;
  const double c = cfg.pyramid_conv ? f.total : 1.0;
  double macs = stack_copies * stacks * c + extras;

  const double o = deform_overhead(static_cast<double>(inp.kernel_h),
                                   static_cast<double>(inp.kernel_w),
                                   static_cast<double>(inp.channels));
  double above = 0.0;
  double above_stack = 0.0;
  for (std::size_t l = 1; l < r.size(); ++l) {
    above += r[l];
    above_stack += (cfg.pyramid_conv ? f.c[l] : 1.0) * r[l];
  }
  if (cfg.sepc_variant != SepcVariant::kNone) macs += extras * o * above;
  if (cfg.sepc_variant == SepcVariant::kFull) {
    macs += stack_copies * stacks * o * above_stack;
  }
  return macs / (2.0 * stacks);
}

FlopsReport flops_report(const HeadConfig& cfg, const CostModelInput& inp) {
  const auto sizes = level_sizes(inp);
  const auto r = pyramid_area_ratios(inp);
  const CostFactors f = pconv_cost_factors(inp);
  const auto ch = static_cast<double>(inp.channels);
  const auto kh = static_cast<double>(inp.kernel_h);
  const auto kw = static_cast<double>(inp.kernel_w);
  FlopsReport rep;
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    rep.levels.push_back(
        {inp.first_level + l, sizes[l], r[l], f.c[l],
         f.c[l] * flops_conv2d(ch, kh, kw, sizes[l].h, sizes[l].w, ch)});
  }
  rep.c_total = f.total;
  rep.head_ratio = head_flops_ratio(cfg, inp);
  rep.deform_factor = 1.0 + deform_overhead(kh, kw, ch);
  rep.sepc_lite_overhead = sepc_lite_overhead(inp);
  return rep;
}

namespace {

std::string g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void write_flops_csv(std::ostream& os, const FlopsReport& report) {
  os << "level,H,W,r,c,macs\n";
  for (const LevelReport& l : report.levels) {
    os << 'P' << l.level << ',' << g6(l.size.h) << ',' << g6(l.size.w) << ','
       << g6(l.r) << ',' << g6(l.c) << ',' << g6(l.macs) << '\n';
  }
  os << "C_total," << g6(report.c_total) << '\n';
  os << "head_ratio," << g6(report.head_ratio) << '\n';
}

}  // namespace sepc
