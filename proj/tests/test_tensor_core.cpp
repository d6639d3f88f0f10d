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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "sepc/conv.hpp"
#include "sepc/error.hpp"
#include "sepc/grad_check.hpp"
#include "sepc/random.hpp"
#include "sepc/tensor_io.hpp"
#include "sepc/upsample.hpp"

namespace sepc {
namespace {

Tensor iota(Shape s) {
  Tensor t(s);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i + 1);
  return t;
}

TEST(Conv2d, IdentityKernel) {
  const Tensor x = iota({1, 1, 3, 3});
  const auto k = Conv2dKernel::make(Tensor({1, 1, 1, 1}, 1.0), 1, 0);
  EXPECT_TRUE(bitwise_equal(conv2d(x, k), x));
}

TEST(Conv2d, OnesKernelCounts) {
  const Tensor x({1, 1, 5, 5}, 1.0);
  const auto k = Conv2dKernel::make(Tensor({1, 1, 3, 3}, 1.0), 1, 1);
  const Tensor y = conv2d(x, k);
  EXPECT_EQ(y(0, 0, 2, 2), 9.0);
  EXPECT_EQ(y(0, 0, 0, 0), 4.0);
  EXPECT_EQ(y(0, 0, 4, 4), 4.0);
  EXPECT_EQ(y(0, 0, 0, 2), 6.0);
}

TEST(Conv2d, Stride2MatchesNaiveLoop) {
  Rng rng(11);
  const Tensor x = random_uniform({1, 1, 7, 7}, rng);
  const auto k = Conv2dKernel::make(random_uniform({1, 1, 3, 3}, rng), 2, 1);
  const Tensor y = conv2d(x, k);
  EXPECT_EQ(y.shape(), (Shape{1, 1, 4, 4}));
  EXPECT_TRUE(bitwise_equal(y, oracle::conv2d(x, k.weights, k.bias, 2, 1)));
}

TEST(Conv2d, RandomizedShapesMatchNaiveLoopExactly) {
  Rng rng(2024);
  int cases = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.next() % 2;
    const std::size_t ci = 1 + rng.next() % 4;
    const std::size_t co = 1 + rng.next() % 4;
    const std::size_t h = 1 + rng.next() % 9;
    const std::size_t w = 1 + rng.next() % 9;
    const std::size_t k = (rng.next() % 2) ? 3 : 1;
    const std::size_t stride = 1 + rng.next() % 2;
    const std::size_t pad = rng.next() % 2;
    if (h + 2 * pad < k || w + 2 * pad < k) continue;
    const bool bias = rng.next() % 2;
    const Tensor x = random_uniform({n, ci, h, w}, rng);
    const auto kern = Conv2dKernel::make(random_uniform({co, ci, k, k}, rng),
                                         stride, pad, bias);
    Conv2dKernel kb = kern;
    if (bias) {
      for (double& b : *kb.bias) b = rng.uniform(-1, 1);
    }
    ASSERT_TRUE(bitwise_equal(conv2d(x, kb),
                              oracle::conv2d(x, kb.weights, kb.bias,
                                             static_cast<long>(stride),
                                             static_cast<long>(pad))))
        << "n=" << n << " ci=" << ci << " co=" << co << " h=" << h
        << " w=" << w << " k=" << k << " s=" << stride << " p=" << pad;
    ++cases;
  }
  EXPECT_GT(cases, 200);
}

TEST(Conv2d, Linearity) {
  Rng rng(5);
  const Tensor x = random_uniform({2, 3, 6, 7}, rng);
  const Tensor y = random_uniform({2, 3, 6, 7}, rng);
  const auto k = Conv2dKernel::kaiming(4, 3, 3, 2, rng);
  const double a = 0.7;
  const double b = -1.3;
  const Tensor lhs = conv2d(a * x + b * y, k);
  const Tensor rhs = a * conv2d(x, k) + b * conv2d(y, k);
  EXPECT_LT(max_abs_diff(lhs, rhs), 1e-12);
}

TEST(Conv2d, Errors) {
  const auto k = Conv2dKernel::make(Tensor({2, 3, 3, 3}), 1, 0);
  try {
    conv2d(Tensor({1, 2, 5, 5}), k);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("axis c"), std::string::npos);
  }
  EXPECT_THROW(conv2d(Tensor({1, 3, 2, 5}), k), DegenerateOutputError);
  EXPECT_THROW(Conv2dKernel::make(Tensor({1, 1, 2, 3}), 1, 0), ShapeError);
  EXPECT_THROW(Conv2dKernel::make(Tensor({1, 1, 3, 3}), 3, 0), DomainError);
}

TEST(Conv2d, CountedMacsMatchProduct) {
  Rng rng(1);
  const Tensor x = random_uniform({1, 3, 10, 16}, rng);
  const auto k = Conv2dKernel::kaiming(5, 3, 3, 1, rng);
  std::uint64_t macs = 0;
  const Tensor y = conv2d_counted(x, k, macs);
  EXPECT_TRUE(bitwise_equal(y, conv2d(x, k)));
  EXPECT_EQ(macs, 3u * 3 * 3 * 10 * 16 * 5);
}

TEST(Conv2dVjp, ZeroGradOut) {
  Rng rng(2);
  const Tensor x = random_uniform({1, 2, 5, 5}, rng);
  const auto k = Conv2dKernel::kaiming(3, 2, 3, 1, rng, true);
  const GradTriple g = conv2d_vjp(x, k, Tensor(conv2d_output_shape(x.shape(), k)));
  EXPECT_EQ(max_abs(g.grad_input), 0.0);
  EXPECT_EQ(max_abs(g.grad_weights), 0.0);
  for (double b : *g.grad_bias) EXPECT_EQ(b, 0.0);
}

TEST(Conv2dVjp, IdentityKernel) {
  Rng rng(3);
  const Tensor x = random_uniform({1, 1, 4, 4}, rng);
  const auto k = Conv2dKernel::make(Tensor({1, 1, 1, 1}, 1.0), 1, 0);
  const Tensor g = random_uniform({1, 1, 4, 4}, rng);
  EXPECT_TRUE(bitwise_equal(conv2d_vjp(x, k, g).grad_input, g));
}

TEST(Conv2dVjp, MatchesFiniteDifferences) {
  Rng rng(4);
  const Tensor x = random_uniform({2, 3, 5, 5}, rng);
  auto k = Conv2dKernel::kaiming(4, 3, 3, 2, rng, true);
  for (double& b : *k.bias) b = rng.uniform(-1, 1);
  const Tensor g = random_uniform(conv2d_output_shape(x.shape(), k), rng);
  const GradTriple a = conv2d_vjp(x, k, g);

  const Tensor fx = finite_diff_grad(
      [&](const Tensor& xx) { return dot(g, conv2d(xx, k)); }, x, 1e-5);
  EXPECT_LT(max_relative_error(a.grad_input, fx), 1e-5);

  const Tensor fw = finite_diff_grad(
      [&](const Tensor& w) {
        Conv2dKernel kk = k;
        kk.weights = w;
        return dot(g, conv2d(x, kk));
      },
      k.weights, 1e-5);
  EXPECT_LT(max_relative_error(a.grad_weights, fw), 1e-5);

  const auto fb = finite_diff_grad(
      [&](std::span<const double> b) {
        Conv2dKernel kk = k;
        kk.bias->assign(b.begin(), b.end());
        return dot(g, conv2d(x, kk));
      },
      *k.bias, 1e-5);
  EXPECT_LT(max_relative_error(*a.grad_bias, fb), 1e-5);
}

TEST(Upsample, ConstantPreserved) {
  const Tensor x({2, 3, 3, 5}, 2.75);
  const Tensor y = upsample_bilinear_x2(x);
  EXPECT_EQ(y.shape(), (Shape{2, 3, 6, 10}));
  for (double v : y.values()) EXPECT_EQ(v, 2.75);
}

TEST(Upsample, RowOfTwo) {
  const double a = 1.5;
  const double b = -4.0;
  const Tensor x({1, 1, 1, 2}, std::vector<double>{a, b});
  const Tensor y = upsample_bilinear_x2(x);
  ASSERT_EQ(y.shape(), (Shape{1, 1, 2, 4}));
  const double expect[4] = {a, 0.75 * a + 0.25 * b, 0.25 * a + 0.75 * b, b};
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_NEAR(y(0, 0, r, i), expect[i], 1e-15);
    }
  }
}

TEST(Upsample, MatchesCoordinateOracleAndStaysInRange) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const Tensor x = random_uniform(
        {1 + rng.next() % 2, 1 + rng.next() % 3, 1 + rng.next() % 7,
         1 + rng.next() % 7},
        rng);
    const Tensor y = upsample_bilinear_x2(x);
    EXPECT_LT(max_abs_diff(y, oracle::upsample_x2(x)), 1e-14);
    const auto [lo, hi] = std::minmax_element(x.values().begin(), x.values().end());
    for (double v : y.values()) {
      EXPECT_GE(v, *lo);
      EXPECT_LE(v, *hi);
    }
  }
}

TEST(Upsample, VjpMatchesFiniteDifferences) {
  Rng rng(9);
  const Tensor x = random_uniform({1, 2, 4, 4}, rng);
  const Tensor g = random_uniform({1, 2, 8, 8}, rng);
  const Tensor a = upsample_bilinear_x2_vjp(x.shape(), g);
  const Tensor f = finite_diff_grad(
      [&](const Tensor& xx) { return dot(g, upsample_bilinear_x2(xx)); }, x,
      1e-5);
  EXPECT_LT(max_relative_error(a, f), 1e-6);
}

TEST(Upsample, EmptyIsError) {
  EXPECT_THROW(upsample_bilinear_x2(Tensor({1, 1, 0, 3})), ShapeError);
}

TEST(FiniteDiff, SumGivesOnes) {
  Rng rng(10);
  const Tensor x = random_uniform({1, 2, 3, 3}, rng);
  const Tensor g = finite_diff_grad([](const Tensor& t) { return sum(t); }, x,
                                    1e-5);
  for (double v : g.values()) EXPECT_NEAR(v, 1.0, 1e-9);
}

TEST(FiniteDiff, QuadraticGivesX) {
  Rng rng(12);
  const Tensor x = random_uniform({1, 1, 4, 4}, rng);
  const Tensor g = finite_diff_grad(
      [](const Tensor& t) { return 0.5 * dot(t, t); }, x, 1e-5);
  EXPECT_LT(max_abs_diff(g, x), 1e-9);
}

TEST(FiniteDiff, AgreesWithConvVjp) {
  Rng rng(13);
  const Tensor x = random_uniform({1, 2, 6, 6}, rng);
  const auto k = Conv2dKernel::kaiming(2, 2, 3, 1, rng);
  const Tensor f = finite_diff_grad(
      [&](const Tensor& t) { return sum(conv2d(t, k)); }, x, 1e-5);
  const Tensor ones(conv2d_output_shape(x.shape(), k), 1.0);
  EXPECT_LT(max_relative_error(conv2d_vjp(x, k, ones).grad_input, f), 1e-5);
}

TEST(TensorIo, RoundTripIsBitExact) {
  Rng rng(14);
  Tensor x = random_normal({2, 3, 4, 5}, rng);
  x[0] = -0.0;
  x[1] = 5e-324;
  std::stringstream ss;
  write_tensor(ss, x);
  const std::string bytes = ss.str();
  EXPECT_EQ(bytes.size(), 22 + 8 * x.size());
  EXPECT_EQ(bytes.substr(0, 4), "SPYT");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 4);
  const Tensor y = read_tensor(ss);
  EXPECT_TRUE(bitwise_equal(x, y));
  std::stringstream again;
  write_tensor(again, y);
  EXPECT_EQ(again.str(), bytes);
}

TEST(TensorIo, LittleEndianLayout) {
  const Tensor x({1, 1, 1, 1}, 1.0);
  std::stringstream ss;
  write_tensor(ss, x);
  const std::string b = ss.str();
  const unsigned char expect[22 + 8] = {'S', 'P', 'Y', 'T', 1, 4, 1, 0, 0, 0,
                                        1,   0,   0,   0,   1, 0, 0, 0, 1, 0,
                                        0,   0,   0,   0,   0, 0, 0, 0, 0xf0, 0x3f};
  ASSERT_EQ(b.size(), sizeof expect);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(static_cast<unsigned char>(b[i]), expect[i]) << "byte " << i;
  }
}

TEST(TensorIo, EmptyTensorHasNoPayload) {
  const Tensor x({0, 3, 4, 5});
  std::stringstream ss;
  write_tensor(ss, x);
  EXPECT_EQ(ss.str().size(), 22u);
  const Tensor y = read_tensor(ss);
  EXPECT_EQ(y.shape(), x.shape());
  EXPECT_EQ(y.size(), 0u);
}

TEST(TensorIo, DistinctErrors) {
  const Tensor x({1, 1, 2, 2}, 3.0);
  std::stringstream ss;
  write_tensor(ss, x);
  const std::string good = ss.str();

  std::string bad = good;
  bad[0] = 'X';
  std::stringstream s1(bad);
  EXPECT_THROW(read_tensor(s1), BadMagicError);

  bad = good;
  bad[4] = 2;
  std::stringstream s2(bad);
  EXPECT_THROW(read_tensor(s2), VersionError);

  std::stringstream s3(good.substr(0, good.size() - 3));
  EXPECT_THROW(read_tensor(s3), TruncatedError);

  std::stringstream s4(good.substr(0, 10));
  EXPECT_THROW(read_tensor(s4), TruncatedError);
}

TEST(TensorIo, FilesAndPyramids) {
  Rng rng(15);
  const auto dir = std::filesystem::temp_directory_path() / "sepc_io_test";
  std::filesystem::create_directories(dir);
  const Tensor x = random_uniform({1, 2, 3, 3}, rng);
  tensor_write(x, dir / "x.spyt");
  EXPECT_TRUE(bitwise_equal(tensor_read(dir / "x.spyt"), x));

  const std::vector<Tensor> levels = {random_uniform({1, 2, 8, 8}, rng),
                                      random_uniform({1, 2, 4, 4}, rng)};
  pyramid_write(levels, dir / "p.spyr");
  const auto back = pyramid_read(dir / "p.spyr");
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t l = 0; l < 2; ++l) EXPECT_TRUE(bitwise_equal(back[l], levels[l]));

  std::ifstream in(dir / "p.spyr", std::ios::binary);
  char head[6];
  in.read(head, 6);
  EXPECT_EQ(std::string(head, 4), "SPYR");
  EXPECT_EQ(head[4], 1);
  EXPECT_EQ(head[5], 2);
  EXPECT_THROW(tensor_read(dir / "missing.spyt"), Error);
  EXPECT_THROW(pyramid_read(dir / "x.spyt"), BadMagicError);
  std::filesystem::remove_all(dir);
}

TEST(Tensor, FitTopLeftAndAdjoint) {
  Rng rng(16);
  const Tensor x = random_uniform({1, 2, 5, 4}, rng);
  const Tensor crop = fit_top_left(x, 3, 6);
  EXPECT_EQ(crop.shape(), (Shape{1, 2, 3, 6}));
  EXPECT_EQ(crop(0, 1, 2, 3), x(0, 1, 2, 3));
  EXPECT_EQ(crop(0, 1, 2, 5), 0.0);
  const Tensor g = random_uniform(crop.shape(), rng);
  EXPECT_NEAR(dot(g, crop), dot(fit_top_left_vjp(x.shape(), g), x), 1e-12);
}

}  // namespace
}  // namespace sepc
