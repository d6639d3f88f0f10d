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

#include <cmath>

#include "sepc/batch_norm.hpp"
#include "sepc/error.hpp"
#include "sepc/grad_check.hpp"

namespace sepc {
namespace {

FeaturePyramid worked_example() {
  return FeaturePyramid({Tensor({1, 1, 2, 2}, 1.0), Tensor({1, 1, 1, 1}, 3.0)});
}

// Direct two-pass moments of one channel over the chosen levels.
std::pair<double, double> direct_moments(const FeaturePyramid& p, std::size_t ch,
                                         const std::vector<std::size_t>& levels) {
  double s = 0.0;
  double n = 0.0;
  for (std::size_t l : levels) {
    for (std::size_t b = 0; b < p[l].n(); ++b) {
      for (std::size_t i = 0; i < p[l].h() * p[l].w(); ++i) {
        s += p[l].plane(b, ch)[i];
        n += 1.0;
      }
    }
  }
  const double mean = s / n;
  double v = 0.0;
  for (std::size_t l : levels) {
    for (std::size_t b = 0; b < p[l].n(); ++b) {
      for (std::size_t i = 0; i < p[l].h() * p[l].w(); ++i) {
        const double d = p[l].plane(b, ch)[i] - mean;
        v += d * d;
      }
    }
  }
  return {mean, v / n};
}

TEST(IbnStatistics, WorkedExample) {
  const ChannelMoments m = ibn_statistics(worked_example());
  EXPECT_NEAR(m.mean[0], 1.4, 1e-15);
  EXPECT_NEAR(m.var[0], 0.64, 1e-15);
}

TEST(IbnStatistics, ConstantLevelsHaveZeroVariance) {
  const FeaturePyramid p = constant_pyramid({2, 3, 8, 8}, 3, 2.5);
  const ChannelMoments m = ibn_statistics(p);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(m.mean[c], 2.5);
    EXPECT_EQ(m.var[c], 0.0);
  }
}

TEST(IbnStatistics, MatchesDirectAndSingleLevel) {
  Rng rng(1);
  const FeaturePyramid p = random_pyramid({2, 3, 9, 7}, 3, rng);
  const ChannelMoments m = ibn_statistics(p);
  const ChannelMoments one = ibn_statistics(FeaturePyramid({p[0]}));
  const ChannelMoments direct = channel_moments(p[0]);
  for (std::size_t c = 0; c < 3; ++c) {
    const auto [mean, var] = direct_moments(p, c, {0, 1, 2});
    EXPECT_NEAR(m.mean[c], mean, 1e-14);
    EXPECT_NEAR(m.var[c], var, 1e-14);
    const auto [m0, v0] = direct_moments(p, c, {0});
    EXPECT_NEAR(one.mean[c], m0, 1e-14);
    EXPECT_NEAR(direct.var[c], v0, 1e-14);
  }
  EXPECT_THROW(ibn_statistics(FeaturePyramid()), ShapeError);
}

TEST(BatchNorm, WorkedExampleIsExact) {
  BNState s = BNState::make(BNMode::kIntegrated, 1, 2);
  s.eps = 0.0;
  const FeaturePyramid y = bn_forward(worked_example(), s);
  for (double v : y[0].values()) EXPECT_EQ(v, -0.5);
  EXPECT_EQ(y[1][0], 2.0);
}

TEST(BatchNorm, IntegratedNormalizesPooledMoments) {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const FeaturePyramid p = random_pyramid(
        {1 + rng.next() % 3, 1 + rng.next() % 4, 5 + rng.next() % 20,
         5 + rng.next() % 20},
        1 + rng.next() % 5, rng, -3.0, 7.0);
    BNState s = BNState::make(BNMode::kIntegrated, p.channels(), p.size());
    s.eps = 0.0;
    const ChannelMoments m = ibn_statistics(bn_forward(p, s));
    for (std::size_t c = 0; c < p.channels(); ++c) {
      EXPECT_NEAR(m.mean[c], 0.0, 1e-10);
      EXPECT_NEAR(m.var[c], 1.0, 1e-10);
    }
  }
}

TEST(BatchNorm, InverseAffineRestoresInput) {
  Rng rng(3);
  const FeaturePyramid p = random_pyramid({2, 3, 12, 10}, 4, rng, -2.0, 5.0);
  const ChannelMoments m = ibn_statistics(p);
  BNState s = BNState::make(BNMode::kIntegrated, 3, 4);
  s.eps = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    s.gamma[0][c] = std::sqrt(m.var[c]);
    s.beta[0][c] = m.mean[c];
  }
  EXPECT_LT(max_abs_diff(bn_forward(p, s), p), 1e-10);
}

TEST(BatchNorm, SingleAndIndependentModes) {
  Rng rng(4);
  const FeaturePyramid p = random_pyramid({2, 2, 10, 10}, 3, rng, -1.0, 4.0);
  BNState single = BNState::make(BNMode::kSingle, 2, 3);
  single.eps = 0.0;
  single.gamma[0] = {2.0, 0.5};
  single.beta[0] = {1.0, -1.0};
  const FeaturePyramid ys = bn_forward(p, single);
  BNState indep = BNState::make(BNMode::kIndependent, 2, 3);
  indep.eps = 0.0;
  for (std::size_t l = 0; l < 3; ++l) {
    indep.gamma[l] = {1.0 + static_cast<double>(l), 1.0};
    indep.beta[l] = {static_cast<double>(l), 0.0};
  }
  const FeaturePyramid yi = bn_forward(p, indep);
  for (std::size_t l = 0; l < 3; ++l) {
    const ChannelMoments ms = channel_moments(ys[l]);
    const ChannelMoments mi = channel_moments(yi[l]);
    EXPECT_NEAR(ms.mean[0], 1.0, 1e-10);
    EXPECT_NEAR(ms.var[0], 4.0, 1e-10);
    EXPECT_NEAR(ms.mean[1], -1.0, 1e-10);
    EXPECT_NEAR(ms.var[1], 0.25, 1e-10);
    EXPECT_NEAR(mi.mean[0], static_cast<double>(l), 1e-10);
    EXPECT_NEAR(mi.var[0], std::pow(1.0 + static_cast<double>(l), 2), 1e-10);
  }
  EXPECT_EQ(single.running_mean.size(), 3u);
  EXPECT_EQ(indep.gamma.size(), 3u);
}

TEST(BatchNorm, RunningStatisticsAndEvalMode) {
  const FeaturePyramid p = worked_example();
  BNState s = BNState::make(BNMode::kIntegrated, 1, 2);
  s.training = false;
  const FeaturePyramid fresh = bn_forward(p, s);
  EXPECT_NEAR(fresh[1][0], 3.0 / std::sqrt(1.0 + 1e-5), 1e-15);
  s.training = true;
  bn_forward(p, s);
  EXPECT_NEAR(s.running_mean[0][0], 0.1 * 1.4, 1e-15);
  EXPECT_NEAR(s.running_var[0][0], 0.9 + 0.1 * 0.64, 1e-15);
  const BNState before = s;
  s.training = false;
  const FeaturePyramid e = bn_forward(p, s);
  EXPECT_EQ(s.running_mean, before.running_mean);
  EXPECT_NEAR(e[0][0], (1.0 - 0.14) / std::sqrt(0.964 + 1e-5), 1e-14);
}

TEST(BatchNorm, Errors) {
  BNState s = BNState::make(BNMode::kSingle, 2, 2);
  EXPECT_THROW(bn_forward(worked_example(), s), ShapeError);
  BNState bad = BNState::make(BNMode::kSingle, 1, 2);
  bad.running_var[0][0] = -1.0;
  EXPECT_THROW(bn_forward(worked_example(), bad), DomainError);
  BNState three = BNState::make(BNMode::kSingle, 1, 3);
  EXPECT_THROW(bn_forward(worked_example(), three), ShapeError);
  EXPECT_THROW(parse_bn_mode("batch"), ConfigError);
  EXPECT_EQ(parse_bn_mode("integrated"), BNMode::kIntegrated);
}

class BatchNormVjp : public ::testing::TestWithParam<BNMode> {};

TEST_P(BatchNormVjp, TrainingModeMatchesFiniteDifferences) {
  Rng rng(5);
  const FeaturePyramid p = random_pyramid({2, 2, 6, 5}, 3, rng);
  const FeaturePyramid g = random_pyramid({2, 2, 6, 5}, 3, rng);
  BNState s = BNState::make(GetParam(), 2, 3);
  for (auto& v : s.gamma) {
    for (double& x : v) x = rng.uniform(0.5, 1.5);
  }
  for (auto& v : s.beta) {
    for (double& x : v) x = rng.uniform(-0.5, 0.5);
  }
  auto loss = [&](const FeaturePyramid& x, BNState st) {
    return dot(g, bn_forward(x, st));
  };
  BNState work = s;
  const BNForward f = bn_forward_cached(p, work);
  const BNGrads b = bn_vjp(f.cache, s, g);
  for (std::size_t l = 0; l < 3; ++l) {
    const Tensor fd = finite_diff_grad(
        [&](const Tensor& t) {
          FeaturePyramid q = p;
          q[l] = t;
          return loss(q, s);
        },
        p[l], 1e-5);
    EXPECT_LT(max_relative_error(b.grad_input[l], fd), 1e-4) << "level " << l;
  }
  for (std::size_t k = 0; k < s.gamma.size(); ++k) {
    const auto fg = finite_diff_grad(
        [&](std::span<const double> v) {
          BNState st = s;
          st.gamma[k].assign(v.begin(), v.end());
          return loss(p, st);
        },
        s.gamma[k], 1e-5);
    EXPECT_LT(max_relative_error(b.grad_gamma[k], fg), 1e-4);
    const auto fb = finite_diff_grad(
        [&](std::span<const double> v) {
          BNState st = s;
          st.beta[k].assign(v.begin(), v.end());
          return loss(p, st);
        },
        s.beta[k], 1e-5);
    EXPECT_LT(max_relative_error(b.grad_beta[k], fb), 1e-4);
  }
}

INSTANTIATE_TEST_SUITE_P(Modes, BatchNormVjp,
                         ::testing::Values(BNMode::kSingle, BNMode::kIndependent,
                                           BNMode::kIntegrated),
                         [](const auto& info) {
                           return std::string(to_string(info.param));
                         });

TEST(BatchNorm, EvalModeVjpIsAffine) {
  Rng rng(6);
  const FeaturePyramid p = random_pyramid({1, 2, 5, 5}, 2, rng);
  const FeaturePyramid g = random_pyramid({1, 2, 5, 5}, 2, rng);
  BNState s = BNState::make(BNMode::kIntegrated, 2, 2);
  s.training = false;
  s.running_var[0] = {0.5, 2.0};
  s.gamma[0] = {1.5, -0.5};
  const BNForward f = bn_forward_cached(p, s);
  const BNGrads b = bn_vjp(f.cache, s, g);
  const Tensor fd = finite_diff_grad(
      [&](const Tensor& t) {
        FeaturePyramid q = p;
        q[0] = t;
        return dot(g, bn_forward(q, s));
      },
      p[0], 1e-5);
  EXPECT_LT(max_relative_error(b.grad_input[0], fd), 1e-6);
}

}  // namespace
}  // namespace sepc
