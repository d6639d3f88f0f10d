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

#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "sepc/conv.hpp"
#include "sepc/error.hpp"
#include "sepc/flops.hpp"
#include "sepc/random.hpp"

namespace sepc {
namespace {

TEST(Flops, PublishedAreaRatios) {
  const std::vector<double> r = pyramid_area_ratios(CostModelInput{});
  const std::vector<double> expect{0.7507, 0.1877, 0.0469, 0.0117, 0.0029};
  ASSERT_EQ(r.size(), expect.size());
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(r[i], expect[i], 5e-5);
}

TEST(Flops, PublishedCostFactors) {
  const CostFactors f = pconv_cost_factors(CostModelInput{});
  EXPECT_EQ(f.c, (std::vector<double>{1.25, 2.25, 2.25, 2.25, 2.0}));
  EXPECT_NEAR(f.total, 1.4985, 5e-4);
}

TEST(Flops, PublishedHeadRatioAndOverheads) {
  const CostModelInput inp;
  HeadConfig cfg;
  EXPECT_NEAR(head_flops_ratio(cfg, inp), 0.99925, 5e-4);
  EXPECT_EQ(1.0 + deform_overhead(3, 3, 256), 1.0 + 26.0 / 256.0);
  EXPECT_NEAR(sepc_lite_overhead(inp), 0.025, 1e-3);
  const double rounded = (4.0 * 1.4985 + 2.0) / 8.0;
  EXPECT_DOUBLE_EQ(rounded, 0.99925);
}

TEST(Flops, RatiosSumToOne) {
  for (SizeMode mode : {SizeMode::kFractional, SizeMode::kCeil}) {
    for (std::size_t levels : {1, 3, 5, 7}) {
      CostModelInput inp;
      inp.size_mode = mode;
      inp.levels = levels;
      inp.image_h = 1000;
      inp.image_w = 617;
      const auto r = pyramid_area_ratios(inp);
      EXPECT_NEAR(std::accumulate(r.begin(), r.end(), 0.0), 1.0, 1e-12);
    }
  }
}

TEST(Flops, CeilSizes) {
  CostModelInput inp;
  inp.size_mode = SizeMode::kCeil;
  const auto s = level_sizes(inp);
  const std::vector<std::pair<double, double>> expect{
      {160, 100}, {80, 50}, {40, 25}, {20, 13}, {10, 7}};
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s[i].h, expect[i].first);
    EXPECT_EQ(s[i].w, expect[i].second);
  }
  inp.size_mode = SizeMode::kFractional;
  EXPECT_EQ(level_sizes(inp).back().w, 6.25);
}

TEST(Flops, SingleLevel) {
  CostModelInput inp;
  inp.levels = 1;
  const CostFactors f = pconv_cost_factors(inp);
  EXPECT_EQ(f.c, std::vector<double>{1.0});
  EXPECT_EQ(f.total, 1.0);
}

TEST(Flops, ConvCountIsMultiplicative) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    double a[6];
    for (double& v : a) v = static_cast<double>(1 + rng.next() % 20);
    const double base = flops_conv2d(a[0], a[1], a[2], a[3], a[4], a[5]);
    for (int k = 0; k < 6; ++k) {
      double b[6];
      std::copy(a, a + 6, b);
      b[k] *= 3.0;
      EXPECT_EQ(flops_conv2d(b[0], b[1], b[2], b[3], b[4], b[5]), 3.0 * base);
    }
    const double ratio = flops_deform_conv2d(a[0], a[1], a[2], a[3], a[4], a[5]) / base;
    EXPECT_NEAR(ratio,
                flops_deform_conv2d(a[0] + 5, a[1], a[2], a[3] + 2, a[4] + 7, a[5]) /
                    flops_conv2d(a[0] + 5, a[1], a[2], a[3] + 2, a[4] + 7, a[5]),
                1e-14);
  }
}

TEST(Flops, CountedConvMatchesModel) {
  Rng rng(2);
  for (int i = 0; i < 30; ++i) {
    const std::size_t ci = 1 + rng.next() % 4;
    const std::size_t co = 1 + rng.next() % 4;
    const std::size_t k = 1 + 2 * (rng.next() % 2);
    const std::size_t stride = 1 + rng.next() % 2;
    const Tensor x = random_uniform({1, ci, 6 + rng.next() % 9, 6 + rng.next() % 9}, rng);
    Conv2dKernel kern = Conv2dKernel::kaiming(co, ci, k, stride, rng);
    kern.padding = 0;
    const auto model = [&](const Conv2dKernel& kk) {
      const Shape out = conv2d_output_shape(x.shape(), kk);
      return flops_conv2d(static_cast<double>(ci), static_cast<double>(k),
                          static_cast<double>(k), static_cast<double>(out.h),
                          static_cast<double>(out.w), static_cast<double>(co));
    };
    std::uint64_t macs = 0;
    conv2d_counted(x, kern, macs);
    EXPECT_EQ(static_cast<double>(macs), model(kern));
    // Zero-padded taps are skipped, so padding only lowers the count.
    kern.padding = k / 2;
    macs = 0;
    conv2d_counted(x, kern, macs);
    EXPECT_LE(static_cast<double>(macs), model(kern));
  }
}

TEST(Flops, VariantOrdering) {
  const CostModelInput inp;
  HeadConfig cfg;
  double previous = 0.0;
  for (SepcVariant v : {SepcVariant::kNone, SepcVariant::kLite, SepcVariant::kFull}) {
    cfg.sepc_variant = v;
    const double r = head_flops_ratio(cfg, inp);
    EXPECT_GT(r, previous) << to_string(v);
    previous = r;
  }
  cfg.sepc_variant = SepcVariant::kLite;
  HeadConfig none;
  EXPECT_NEAR(head_flops_ratio(cfg, inp) - head_flops_ratio(none, inp),
              2.0 * sepc_lite_overhead(inp) / 8.0, 1e-15);
}

TEST(Flops, PlainNonCombinedHeadIsBaseline) {
  HeadConfig cfg;
  cfg.combined = false;
  cfg.extra_conv = false;
  cfg.pyramid_conv = false;
  EXPECT_EQ(head_flops_ratio(cfg, CostModelInput{}), 1.0);
  cfg.stacks = 2;
  EXPECT_EQ(head_flops_ratio(cfg, CostModelInput{}), 1.0);
}

TEST(Flops, CombinedFormula) {
  const CostModelInput inp;
  const double c = pconv_cost_factors(inp).total;
  for (std::size_t s : {2, 3, 4, 6}) {
    HeadConfig cfg;
    cfg.stacks = s;
    const double sd = static_cast<double>(s);
    EXPECT_DOUBLE_EQ(head_flops_ratio(cfg, inp), (sd * c + 2.0) / (2.0 * sd));
  }
}

TEST(Flops, UpsampleOption) {
  CostModelInput inp;
  const CostFactors plain = pconv_cost_factors(inp);
  inp.include_upsample = true;
  const CostFactors up = pconv_cost_factors(inp);
  const double extra = 7.0 / (256.0 * 9.0);
  for (std::size_t l = 0; l + 1 < up.c.size(); ++l) {
    EXPECT_DOUBLE_EQ(up.c[l], plain.c[l] + extra);
  }
  EXPECT_EQ(up.c.back(), plain.c.back());
}

TEST(Flops, CsvLayout) {
  std::ostringstream os;
  write_flops_csv(os, flops_report(HeadConfig{}, CostModelInput{}));
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("level,H,W,r,c,macs\nP3,160,100,0.750733,1.25,", 0), 0u);
  EXPECT_NE(s.find("\nP7,10,6.25,"), std::string::npos);
  EXPECT_NE(s.find("\nC_total,1.49853\n"), std::string::npos);
  EXPECT_NE(s.find("\nhead_ratio,0.999267\n"), std::string::npos);
}

TEST(Flops, InvalidInputs) {
  CostModelInput inp;
  inp.levels = 0;
  EXPECT_THROW(pyramid_area_ratios(inp), ConfigError);
  inp = CostModelInput{};
  inp.kernel_h = 2;
  EXPECT_THROW(pconv_cost_factors(inp), ConfigError);
  EXPECT_THROW(deform_overhead(3, 3, 0), DomainError);
  EXPECT_THROW(parse_size_mode("round"), ConfigError);
  HeadConfig cfg;
  cfg.stacks = 1;
  EXPECT_THROW(head_flops_ratio(cfg, CostModelInput{}), ConfigError);
}

}  // namespace
}  // namespace sepc
