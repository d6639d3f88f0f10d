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

#include "sepc/calibration.hpp"
#include "sepc/config.hpp"
#include "sepc/error.hpp"

namespace sepc {
namespace {

TEST(Config, ParsesCommentsAndWhitespace) {
  const KeyValueConfig kv = parse_config_text(
      "# head\n"
      "stacks = 3   # trailing\n"
      "\n"
      "  sepc_variant=lite\n"
      "size_mode =ceil\r\n");
  ASSERT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv.at("stacks").value, "3");
  EXPECT_EQ(kv.at("stacks").line, 2u);
  EXPECT_EQ(kv.at("sepc_variant").value, "lite");
  EXPECT_EQ(kv.at("size_mode").value, "ceil");
}

TEST(Config, RejectsMalformedLines) {
  EXPECT_THROW(parse_config_text("stacks 3\n"), ConfigError);
  EXPECT_THROW(parse_config_text("Stacks=3\n"), ConfigError);
  EXPECT_THROW(parse_config_text("9lives=3\n"), ConfigError);
  EXPECT_THROW(parse_config_text("=3\n"), ConfigError);
  EXPECT_THROW(parse_config_text("a=1\na=2\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/sepc.cfg"), ConfigError);
}

TEST(Config, AppliesHeadKeys) {
  HeadConfig cfg;
  apply_head_config(parse_config_text("stacks=6\nchannels=8\ncombined=no\n"
                                      "extra_conv=off\npyramid_conv=0\n"
                                      "bn_mode=independent\nsepc_variant=full\n"
                                      "num_classes=3\nseed=99\n"),
                    cfg);
  EXPECT_EQ(cfg.stacks, 6u);
  EXPECT_EQ(cfg.channels, 8u);
  EXPECT_FALSE(cfg.combined);
  EXPECT_FALSE(cfg.extra_conv);
  EXPECT_FALSE(cfg.pyramid_conv);
  EXPECT_EQ(cfg.bn_mode, BNMode::kIndependent);
  EXPECT_EQ(cfg.sepc_variant, SepcVariant::kFull);
  ASSERT_TRUE(cfg.outputs.has_value());
  EXPECT_EQ(cfg.outputs->num_classes, 3u);
  EXPECT_EQ(cfg.outputs->anchors, 9u);
  EXPECT_EQ(cfg.seed, 99u);
  apply_head_config(parse_config_text("bn_mode=off\n"), cfg);
  EXPECT_FALSE(cfg.bn_mode.has_value());
}

TEST(Config, AppliesCostKeys) {
  CostModelInput inp;
  apply_cost_model_config(parse_config_text("image_h=640\nimage_w=480\nlevels=3\n"
                                            "kernel_h=1\nkernel_w=1\n"
                                            "size_mode=ceil\ninclude_upsample=true\n"),
                          inp);
  EXPECT_EQ(inp.image_h, 640u);
  EXPECT_EQ(inp.image_w, 480u);
  EXPECT_EQ(inp.levels, 3u);
  EXPECT_EQ(inp.kernel_h, 1u);
  EXPECT_EQ(inp.size_mode, SizeMode::kCeil);
  EXPECT_TRUE(inp.include_upsample);
}

TEST(Config, ValueErrorsNameTheLine) {
  HeadConfig cfg;
  try {
    apply_head_config(parse_config_text("# x\nstacks=four\n"), cfg);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(apply_head_config(parse_config_text("stacks=9\n"), cfg), ConfigError);
  EXPECT_THROW(apply_head_config(parse_config_text("combined=maybe\n"), cfg),
               ConfigError);
  EXPECT_THROW(apply_head_config(parse_config_text("sepc_variant=huge\n"), cfg),
               ConfigError);
  CostModelInput inp;
  EXPECT_THROW(apply_cost_model_config(parse_config_text("levels=-1\n"), inp),
               ConfigError);
  EXPECT_THROW(apply_cost_model_config(parse_config_text("kernel_w=4\n"), inp),
               ConfigError);
}

TEST(Config, UnknownKeys) {
  EXPECT_NO_THROW(reject_unknown_keys(parse_config_text("stacks=2\nimage_h=64\n")));
  EXPECT_THROW(reject_unknown_keys(parse_config_text("stack=2\n")), ConfigError);
}

TEST(Config, Scalars) {
  EXPECT_EQ(parse_uint("k", "18446744073709551615"), 18446744073709551615ull);
  EXPECT_THROW(parse_uint("k", "18446744073709551616"), ConfigError);
  EXPECT_THROW(parse_uint("k", "1.5"), ConfigError);
  EXPECT_THROW(parse_uint("k", ""), ConfigError);
  for (const char* t : {"true", "1", "yes", "on"}) EXPECT_TRUE(parse_bool("k", t));
  for (const char* f : {"false", "0", "no", "off"}) EXPECT_FALSE(parse_bool("k", f));
  EXPECT_THROW(parse_bool("k", "TRUE"), ConfigError);
}

TEST(Calibration, CommittedFileIsComplete) {
  const Calibration& cal = committed_calibration();
  for (const char* key :
       {"s0", "lemma1_size", "lemma1_seed", "lemma1_pre_blur", "lemma1_discrepancy",
        "semigroup_tolerance", "jump_max_abs", "equivariance_size",
        "equivariance_levels", "equivariance_seed", "equivariance_gaussian",
        "equivariance_control"}) {
    EXPECT_TRUE(cal.contains(key)) << key;
  }
  EXPECT_EQ(cal.real("s0"), 0.5);
  EXPECT_EQ(cal.integer("lemma1_size"), 128u);
  EXPECT_FALSE(committed_calibration_text().empty());
}

TEST(Calibration, TypedAccess) {
  const Calibration cal(parse_config_text("a=1.5e-3\nb=12\nc=x\n"));
  EXPECT_EQ(cal.real("a"), 1.5e-3);
  EXPECT_EQ(cal.integer("b"), 12u);
  EXPECT_THROW(cal.real("c"), ConfigError);
  EXPECT_THROW(cal.integer("a"), ConfigError);
  EXPECT_THROW(cal.real("missing"), ConfigError);
}

}  // namespace
}  // namespace sepc
