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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sepc/batch_norm.hpp"
#include "sepc/calibration.hpp"
#include "sepc/conv.hpp"
#include "sepc/deform_conv.hpp"
#include "sepc/experiments.hpp"
#include "sepc/flops.hpp"
#include "sepc/head.hpp"
#include "sepc/pconv.hpp"
#include "sepc/scale_space.hpp"
#include "sepc/sepc.hpp"
#include "sepc/training.hpp"

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates sub-check results into one criterion line.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
    notes_.push_back(what);
  }
  void note(const std::string& what) { notes_.push_back(what); }
  Outcome outcome() const {
    Outcome o;
    o.pass = failures_.empty();
    const auto& list = failures_.empty() ? notes_ : failures_;
    for (std::size_t i = 0; i < list.size(); ++i) {
      o.detail += (i ? "; " : "") + list[i];
    }
    if (!o.pass) o.detail = "failed: " + o.detail;
    return o;
  }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Outcome flops_golden() {
  Checks c;
  const sepc::CostModelInput inp;
  const std::vector<double> r = sepc::pyramid_area_ratios(inp);
  const std::vector<double> published{0.7507, 0.1877, 0.0469, 0.0117, 0.0029};
  double worst = 0.0;
  for (std::size_t i = 0; i < published.size(); ++i) {
    worst = std::max(worst, std::abs(r[i] - published[i]));
  }
  c.expect(worst <= 5e-5, "r max dev " + g(worst));
  const sepc::CostFactors f = sepc::pconv_cost_factors(inp);
  c.expect(f.c == std::vector<double>{1.25, 2.25, 2.25, 2.25, 2.0}, "c exact");
  c.expect(std::abs(f.total - 1.4985) <= 5e-4, "C_total " + g(f.total));
  const double ratio = sepc::head_flops_ratio(sepc::HeadConfig{}, inp);
  c.expect(std::abs(ratio - 0.99925) <= 5e-4, "head ratio " + g(ratio));
  c.expect(1.0 + sepc::deform_overhead(3, 3, 256) == 1.0 + 26.0 / 256.0,
           "deform factor 1+26/256");
  const double lite = sepc::sepc_lite_overhead(inp);
  c.expect(std::abs(lite - 0.025) <= 1e-3, "lite overhead " + g(lite));
  return c.outcome();
}

Outcome kernel_correctness() {
  Checks c;
  sepc::Rng rng(2024);
  int exact = 0;
  int trials = 0;
  for (std::size_t stride : {1, 2}) {
    for (std::size_t pad : {0, 1}) {
      for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + rng.next() % 2;
        const std::size_t ci = 1 + rng.next() % 4;
        const std::size_t co = 1 + rng.next() % 4;
        const std::size_t k = 1 + 2 * (rng.next() % 2);
        const std::size_t h = k + rng.next() % (10 - k);
        const std::size_t w = k + rng.next() % (10 - k);
        const sepc::Tensor x = sepc::random_uniform({n, ci, h, w}, rng);
        sepc::Conv2dKernel kern = sepc::Conv2dKernel::kaiming(co, ci, k, stride, rng,
                                                              rng.next() % 2 == 0);
        kern.padding = pad;
        const sepc::Tensor ref = sepc::oracle::conv2d(
            x, kern.weights, kern.bias, static_cast<long>(stride), static_cast<long>(pad));
        ++trials;
        if (sepc::bitwise_equal(sepc::conv2d(x, kern), ref)) ++exact;
      }
    }
  }
  c.expect(exact == trials,
           "conv2d == naive loop on " + std::to_string(exact) + "/" + std::to_string(trials));

  int deform_ok = 0;
  for (int t = 0; t < 50; ++t) {
    const sepc::Tensor x = sepc::random_uniform(
        {1 + rng.next() % 2, 1 + rng.next() % 4, 3 + rng.next() % 7, 3 + rng.next() % 7},
        rng);
    const sepc::Conv2dKernel kern =
        sepc::Conv2dKernel::kaiming(1 + rng.next() % 4, x.c(), 3, 1 + rng.next() % 2, rng);
    const sepc::Tensor off(sepc::offset_field_shape(x.shape(), kern));
    if (sepc::bitwise_equal(sepc::deform_conv2d(x, kern, off), sepc::conv2d(x, kern))) {
      ++deform_ok;
    }
  }
  c.expect(deform_ok == 50, "deform zero offsets bitwise " + std::to_string(deform_ok) + "/50");

  int sepc_ok = 0;
  for (int t = 0; t < 20; ++t) {
    const sepc::FeaturePyramid p = sepc::random_pyramid(
        {1, 1 + rng.next() % 3, 8 + rng.next() % 17, 8 + rng.next() % 17},
        1 + rng.next() % 4, rng);
    const sepc::SepcLayer layer =
        sepc::SepcLayer::from(sepc::PConvLayer::kaiming(p.channels(), p.channels(), rng));
    if (sepc::bitwise_equal(sepc::sepc_forward(p, layer),
                            sepc::pconv_forward(p, layer.base))) {
      ++sepc_ok;
    }
  }
  c.expect(sepc_ok == 20, "sepc zero predictors bitwise " + std::to_string(sepc_ok) + "/20");
  return c.outcome();
}

Outcome gradient_checks() {
  Checks c;
  for (const sepc::GradcheckResult& r : sepc::run_gradcheck_suites(0)) {
    c.expect(r.passed(), r.suite + " " + g(r.error) + " <= " + g(r.tolerance));
  }
  return c.outcome();
}

Outcome scale_space() {
  Checks c;
  const sepc::Calibration& cal = sepc::committed_calibration();
  const sepc::ScaleSpaceExperiment e = sepc::ScaleSpaceExperiment::from(cal);
  const sepc::Tensor x = e.input();
  double trivial = 0.0;
  for (auto [m, n] : {std::pair{0, 0}, std::pair{0, 1}, std::pair{1, 0}, std::pair{0, 2},
                      std::pair{2, 0}}) {
    trivial = std::max(trivial, std::abs(sepc::verify_lemma1(x, m, n, e.s0)));
  }
  c.expect(trivial == 0.0, "m*n=0 gives " + g(trivial));
  const double constant =
      sepc::verify_lemma1(sepc::Tensor({1, 1, 128, 128}, 3.0), 1, 1, e.s0);
  c.expect(constant <= 1e-12, "constant image " + g(constant));
  const double d = sepc::verify_lemma1(x, 1, 1, e.s0);
  const double golden = cal.real("lemma1_discrepancy");
  c.expect(d <= 1.1 * golden, "lemma1 " + g(d) + " vs golden " + g(golden));
  const double s = sepc::semigroup_discrepancy(x);
  const double tol = cal.real("semigroup_tolerance");
  c.expect(s <= tol, "semigroup " + g(s) + " <= " + g(tol));
  return c.outcome();
}

Outcome equivariance() {
  Checks c;
  const sepc::Calibration& cal = sepc::committed_calibration();
  const sepc::EquivarianceOutcome o =
      sepc::run_equivariance(sepc::EquivarianceExperiment::from(cal));
  c.note("gaussian " + g(o.gaussian) + ", control " + g(o.control));
  c.expect(o.separation >= 5.0, "separation " + g(o.separation) + " >= 5");
  return c.outcome();
}

Outcome integrated_bn() {
  Checks c;
  sepc::Rng rng(6);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const sepc::FeaturePyramid p = sepc::random_pyramid(
        {1 + rng.next() % 3, 1 + rng.next() % 4, 4 + rng.next() % 29, 4 + rng.next() % 29},
        1 + rng.next() % 5, rng, -5.0, 9.0);
    sepc::BNState s = sepc::BNState::make(sepc::BNMode::kIntegrated, p.channels(), p.size());
    s.eps = 0.0;
    const sepc::ChannelMoments m = sepc::ibn_statistics(sepc::bn_forward(p, s));
    for (std::size_t ch = 0; ch < p.channels(); ++ch) {
      worst = std::max({worst, std::abs(m.mean[ch]), std::abs(m.var[ch] - 1.0)});
    }
  }
  c.expect(worst <= 1e-10, "pooled moments dev " + g(worst));
  sepc::BNState s = sepc::BNState::make(sepc::BNMode::kIntegrated, 1, 2);
  s.eps = 0.0;
  const sepc::FeaturePyramid y = sepc::bn_forward(
      sepc::FeaturePyramid({sepc::Tensor({1, 1, 2, 2}, 1.0), sepc::Tensor({1, 1, 1, 1}, 3.0)}),
      s);
  bool exact = y[1][0] == 2.0;
  for (double v : y[0].values()) exact = exact && v == -0.5;
  c.expect(exact, "worked example (" + g(y[0][0]) + ", " + g(y[1][0]) + ")");
  return c.outcome();
}

Outcome smoke_training() {
  Checks c;
  const sepc::RegressionTask task = sepc::make_regression_task();
  for (sepc::SepcVariant v : {sepc::SepcVariant::kNone, sepc::SepcVariant::kFull}) {
    const sepc::TrainingRun run =
        sepc::train_head(sepc::regression_head_config(v), task, 200, 0.1);
    c.expect(run.final_loss < run.losses.front(),
             std::string(sepc::to_string(v)) + " " + g(run.losses.front()) + " -> " +
                 g(run.final_loss));
  }
  return c.outcome();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome cli_determinism() {
  Checks c;
#ifdef SEPC_CLI_PATH
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() /
                       ("sepc-acceptance-" + std::to_string(
                                                 std::chrono::steady_clock::now()
                                                     .time_since_epoch()
                                                     .count()));
  fs::create_directories(dir);
  const std::string cli = SEPC_CLI_PATH;
  struct Run {
    std::string name;
    std::string args;
    std::vector<std::string> files;
  };
  const std::vector<Run> runs = {
      {"flops", "flops --variant full --out {}/r.csv", {"r.csv"}},
      {"verify-scale-space", "verify-scale-space --seed 7 --out {}/r.csv", {"r.csv"}},
      {"equivariance", "equivariance --seed 11 --out {}/r.csv", {"r.csv"}},
      {"gradcheck", "gradcheck --seed 5 --out {}/r.csv", {"r.csv"}},
      {"demo-head", "demo-head --seed 9 --variant lite --out {}/h", {"h_cls.spyr", "h_loc.spyr"}},
      {"correlate", "", {"r.csv"}},
  };
  auto expand = [](std::string s, const fs::path& d) {
    for (std::size_t at; (at = s.find("{}")) != std::string::npos;) {
      s.replace(at, 2, d.string());
    }
    return s;
  };
  for (int pass = 0; pass < 2; ++pass) fs::create_directories(dir / std::to_string(pass));
  bool all = true;
  for (const Run& r : runs) {
    std::vector<std::string> outputs[2];
    int codes[2];
    for (int pass = 0; pass < 2; ++pass) {
      const fs::path d = dir / std::to_string(pass);
      // Both correlate runs read the first demo-head output.
      const std::string args = r.name == "correlate"
                                   ? "correlate --input " + (dir / "0" / "h_loc.spyr").string() +
                                         " --out " + (d / "r.csv").string()
                                   : expand(r.args, d);
      const std::string cmd = cli + " " + args + " > " + (d / "stdout.txt").string() + " 2>&1";
      codes[pass] = std::system(cmd.c_str());
      outputs[pass].push_back(slurp(d / "stdout.txt"));
      for (const std::string& f : r.files) outputs[pass].push_back(slurp(d / f));
    }
    const bool same = codes[0] == codes[1] && outputs[0] == outputs[1] &&
                      !outputs[0].back().empty();
    if (!same) c.expect(false, r.name + " differs between runs");
    all = all && same;
  }
  if (all) c.note("6 subcommands byte-identical across two runs");
  std::error_code ec;
  fs::remove_all(dir, ec);
#else
  c.expect(false, "CLI not built");
#endif
  return c.outcome();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"FLOPs golden numbers", flops_golden},
      {"kernel correctness", kernel_correctness},
      {"gradient checks", gradient_checks},
      {"scale-space verification", scale_space},
      {"equivariance separation", equivariance},
      {"iBN normalization", integrated_bn},
      {"head smoke training", smoke_training},
      {"CLI determinism", cli_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::printf("criterion %zu %s: %s (%.2fs) %s\n", i + 1, criteria[i].first.c_str(),
                o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
