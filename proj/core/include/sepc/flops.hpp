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

// Analytical multiply-accumulate (MAC) model of the detection head.
//
// Costs are expressed relative to one plain 3x3 convolution applied to every
// pyramid level. Level l has area ratio r_l = H_l W_l / sum_j H_j W_j and a
// PConv stack costs c_l times a plain convolution there:
//   1.25 at the bottom (same + quarter-size up term),
//   2.25 on interior levels (same + down + up),
//   2    at the top (same + down).

#ifndef SEPC_FLOPS_HPP_
#define SEPC_FLOPS_HPP_

#include <cstddef>
#include <ostream>
#include <string_view>
#include <vector>

#include "sepc/head.hpp"

namespace sepc {

enum class SizeMode { kFractional, kCeil };

std::string_view to_string(SizeMode m);
/// Accepts "fractional", "ceil".
SizeMode parse_size_mode(std::string_view s);

struct CostModelInput {
  std::size_t image_c = 3;
  std::size_t image_h = 1280;
  std::size_t image_w = 800;
  std::size_t first_level = 3;  // stride 2^first_level
  std::size_t levels = 5;
  std::size_t channels = 256;
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;
  SizeMode size_mode = SizeMode::kFractional;
  // Adds 7 MACs per upsampled output element to c_l.
  bool include_upsample = false;

  void validate() const;
};

double flops_conv2d(double c_in, double k_h, double k_w, double h, double w,
                    double c_out);
double flops_deform_conv2d(double c_in, double k_h, double k_w, double h,
                           double w, double c_out);
/// (8 + 2 k_h k_w) / c_out: extra cost of a deformable over a plain conv.
double deform_overhead(double k_h, double k_w, double c_out);

struct LevelSize {
  double h = 0.0;
  double w = 0.0;
};

std::vector<LevelSize> level_sizes(const CostModelInput& inp);

/// Bottom-up r_l; sums to 1.
std::vector<double> pyramid_area_ratios(const CostModelInput& inp);

struct CostFactors {
  std::vector<double> c;  // bottom-up
  double total = 0.0;     // sum c_l r_l
};

/// A single level degenerates to c = (1), total 1.
CostFactors pconv_cost_factors(const CostModelInput& inp);

/// Head MACs over the baseline head (two branches of cfg.stacks plain convs).
double head_flops_ratio(const HeadConfig& cfg, const CostModelInput& inp);

/// Extra cost of one deformable convolution applied above the bottom level,
/// relative to one plain convolution over the pyramid.
double sepc_lite_overhead(const CostModelInput& inp);

struct LevelReport {
  std::size_t level = 0;
  LevelSize size;
  double r = 0.0;
  double c = 0.0;
  double macs = 0.0;  // one PConv stack at this level
};

struct FlopsReport {
  std::vector<LevelReport> levels;
  double c_total = 0.0;
  double head_ratio = 0.0;
  double deform_factor = 0.0;
  double sepc_lite_overhead = 0.0;
};

FlopsReport flops_report(const HeadConfig& cfg, const CostModelInput& inp);

/// CSV: header `level,H,W,r,c,macs`, one row per level, then `C_total,v` and
/// `head_ratio,v`. Reals use 6 significant digits.
void write_flops_csv(std::ostream& os, const FlopsReport& report);

}  // namespace sepc

#endif  // SEPC_FLOPS_HPP_
