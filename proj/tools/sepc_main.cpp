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

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "sepc/calibration.hpp"
#include "sepc/config.hpp"
#include "sepc/correlation.hpp"
#include "sepc/equivariance.hpp"
#include "sepc/error.hpp"
#include "sepc/experiments.hpp"
#include "sepc/flops.hpp"
#include "sepc/head.hpp"
#include "sepc/random.hpp"
#include "sepc/scale_space.hpp"
#include "sepc/tensor_io.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

constexpr double kPublishedCTotal = 1.4985;
constexpr double kPublishedHeadRatio = 0.99925;
constexpr double kFlopsTolerance = 5e-4;

std::string g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  std::string config;
};

// Report sink: the --out file when given, stdout otherwise.
class Report {
 public:
  explicit Report(const std::string& path) {
    if (path.empty()) return;
    file_.open(path, std::ios::binary);
    if (!file_) throw sepc::ConfigError("cannot open output file '" + path + "'");
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

sepc::KeyValueConfig load_common_config(const Common& c) {
  if (c.config.empty()) return {};
  sepc::KeyValueConfig kv = sepc::load_config(c.config);
  sepc::reject_unknown_keys(kv);
  return kv;
}

// Head and cost-model flags shared by `flops` and `demo-head`. Values given on
// the command line override the --config file.
struct HeadFlags {
  CLI::Option* stacks = nullptr;
  CLI::Option* channels = nullptr;
  CLI::Option* head = nullptr;
  CLI::Option* extra = nullptr;
  CLI::Option* pconv = nullptr;
  CLI::Option* bn = nullptr;
  CLI::Option* variant = nullptr;
  CLI::Option* classes = nullptr;
  CLI::Option* anchors = nullptr;
  std::size_t stacks_v = 0;
  std::size_t channels_v = 0;
  std::string head_v;
  bool extra_v = true;
  bool pconv_v = true;
  std::string bn_v;
  std::string variant_v;
  std::size_t classes_v = 0;
  std::size_t anchors_v = 0;

  void add(CLI::App& app) {
    stacks = app.add_option("--stacks", stacks_v, "Stacked convolutions per head (2-6)");
    channels = app.add_option("--channels", channels_v, "Feature channels C");
    head = app.add_option("--head", head_v, "Stack layout")
               ->check(CLI::IsMember({"combined", "separate"}));
    extra = app.add_flag("--extra-conv,!--no-extra-conv", extra_v,
                         "Per-branch extra convolution");
    pconv = app.add_flag("--pyramid-conv,!--no-pyramid-conv", pconv_v,
                         "Stacks use PConv (off: single-scale convs)");
    bn = app.add_option("--bn-mode", bn_v, "off|single|independent|integrated");
    variant = app.add_option("--variant", variant_v, "SEPC variant")
                  ->check(CLI::IsMember({"none", "lite", "full"}));
    classes = app.add_option("--num-classes", classes_v, "Classes per anchor");
    anchors = app.add_option("--anchors", anchors_v, "Anchors per location");
  }

  sepc::HeadConfig resolve(const sepc::KeyValueConfig& kv, sepc::HeadConfig cfg) const {
    sepc::apply_head_config(kv, cfg);
    if (stacks->count()) cfg.stacks = stacks_v;
    if (channels->count()) cfg.channels = channels_v;
    if (head->count()) cfg.combined = head_v == "combined";
    if (extra->count()) cfg.extra_conv = extra_v;
    if (pconv->count()) cfg.pyramid_conv = pconv_v;
    if (bn->count()) {
      if (bn_v == "off" || bn_v == "none") {
        cfg.bn_mode.reset();
      } else {
        cfg.bn_mode = sepc::parse_bn_mode(bn_v);
      }
    }
    if (variant->count()) cfg.sepc_variant = sepc::parse_sepc_variant(variant_v);
    if (classes->count() || anchors->count()) {
      if (!cfg.outputs) cfg.outputs = sepc::HeadOutputs{};
      if (classes->count()) cfg.outputs->num_classes = classes_v;
      if (anchors->count()) cfg.outputs->anchors = anchors_v;
    }
    cfg.validate();
    return cfg;
  }
};

struct CostFlags {
  CLI::Option* image_h = nullptr;
  CLI::Option* image_w = nullptr;
  CLI::Option* first = nullptr;
  CLI::Option* levels = nullptr;
  CLI::Option* kernel = nullptr;
  CLI::Option* mode = nullptr;
  CLI::Option* upsample = nullptr;
  std::size_t image_h_v = 0;
  std::size_t image_w_v = 0;
  std::size_t first_v = 0;
  std::size_t levels_v = 0;
  std::size_t kernel_v = 0;
  std::string mode_v;
  bool upsample_v = false;

  void add(CLI::App& app) {
    image_h = app.add_option("--image-h", image_h_v, "Input image height");
    image_w = app.add_option("--image-w", image_w_v, "Input image width");
    first = app.add_option("--first-level", first_v, "Bottom level index (stride 2^l)");
    levels = app.add_option("--levels", levels_v, "Pyramid levels");
    kernel = app.add_option("--kernel", kernel_v, "Square kernel extent");
    mode = app.add_option("--size-mode", mode_v, "Level sizes")
               ->check(CLI::IsMember({"fractional", "ceil"}));
    upsample = app.add_flag("--include-upsample", upsample_v,
                            "Count 7 MACs per upsampled output element");
  }

  sepc::CostModelInput resolve(const sepc::KeyValueConfig& kv,
                               std::size_t channels) const {
    sepc::CostModelInput inp;
    inp.channels = channels;
    sepc::apply_cost_model_config(kv, inp);
    if (image_h->count()) inp.image_h = image_h_v;
    if (image_w->count()) inp.image_w = image_w_v;
    if (first->count()) inp.first_level = first_v;
    if (levels->count()) inp.levels = levels_v;
    if (kernel->count()) inp.kernel_h = inp.kernel_w = kernel_v;
    if (mode->count()) inp.size_mode = sepc::parse_size_mode(mode_v);
    if (upsample->count()) inp.include_upsample = upsample_v;
    inp.validate();
    return inp;
  }
};

int run_flops(const Common& c, const HeadFlags& hf, const CostFlags& cf, bool check) {
  const sepc::KeyValueConfig kv = load_common_config(c);
  const sepc::HeadConfig cfg = hf.resolve(kv, sepc::HeadConfig{});
  const sepc::CostModelInput inp = cf.resolve(kv, cfg.channels);
  const sepc::FlopsReport rep = sepc::flops_report(cfg, inp);
  Report out(c.out);
  sepc::write_flops_csv(out.stream(), rep);
  if (!check) return kOk;
  const double dc = std::abs(rep.c_total - kPublishedCTotal);
  const double dr = std::abs(rep.head_ratio - kPublishedHeadRatio);
  const bool ok = dc <= kFlopsTolerance && dr <= kFlopsTolerance;
  std::cerr << "check C_total " << g6(rep.c_total) << " vs " << kPublishedCTotal
            << ", head_ratio " << g6(rep.head_ratio) << " vs " << kPublishedHeadRatio
            << ": " << (ok ? "ok" : "FAILED") << "\n";
  return ok ? kOk : kCheckFailed;
}

struct ScaleSpaceFlags {
  std::size_t m = 1;
  std::size_t n = 1;
  std::size_t size = 128;
  double pre_blur = 2.0;
  double s0 = 0.5;
  std::string input;
  std::optional<double> lemma_tol;
  std::optional<double> semigroup_tol;
};

int run_verify_scale_space(const Common& c, const ScaleSpaceFlags& f) {
  const sepc::Calibration& cal = sepc::committed_calibration();
  const double lemma_tol = f.lemma_tol.value_or(cal.real("lemma1_tolerance"));
  const double semi_tol = f.semigroup_tol.value_or(cal.real("semigroup_tolerance"));
  const sepc::Tensor x = f.input.empty()
                             ? sepc::band_limited_noise({1, 1, f.size, f.size},
                                                        c.seed, f.pre_blur)
                             : sepc::tensor_read(f.input);
  const double lemma = sepc::verify_lemma1(x, f.m, f.n, f.s0);
  const double semi = sepc::semigroup_discrepancy(x);
  Report out(c.out);
  std::ostream& os = out.stream();
  os << "check,value,threshold,status\n";
  os << "lemma1_m" << f.m << "_n" << f.n << ',' << g6(lemma) << ',' << g6(lemma_tol)
     << ',' << (lemma <= lemma_tol ? "pass" : "fail") << '\n';
  os << "semigroup," << g6(semi) << ',' << g6(semi_tol) << ','
     << (semi <= semi_tol ? "pass" : "fail") << '\n';
  return lemma <= lemma_tol && semi <= semi_tol ? kOk : kCheckFailed;
}

struct EquivarianceFlags {
  std::size_t size = 256;
  std::size_t levels = 4;
  std::size_t channels = 1;
  std::size_t m = 1;
  double pre_blur = 2.0;
  double s0 = 0.5;
  double min_separation = 5.0;
  bool constant = false;
};

int run_equivariance(const Common& c, const EquivarianceFlags& f) {
  Report out(c.out);
  std::ostream& os = out.stream();
  if (f.constant) {
    const sepc::GaussianPyramid g = sepc::constant_gaussian_pyramid(
        {1, f.channels, f.size, f.size}, {f.s0, f.levels}, 1.0);
    const double e = sepc::equivariance_error(g, sepc::averaging_pconv(f.channels), f.m, f.s0);
    os << "pyramid,error\nconstant," << g6(e) << '\n';
    return e <= 1e-10 ? kOk : kCheckFailed;
  }
  sepc::EquivarianceExperiment e;
  e.size = f.size;
  e.levels = f.levels;
  e.channels = f.channels;
  e.shift = f.m;
  e.seed = c.seed;
  e.pre_blur = f.pre_blur;
  e.s0 = f.s0;
  const sepc::EquivarianceOutcome o = sepc::run_equivariance(e);
  os << "pyramid,error\n"
     << "gaussian," << g6(o.gaussian) << '\n'
     << "control," << g6(o.control) << '\n';
  if (f.m == 0) {
    os << "separation,n/a\n";
    return kOk;
  }
  os << "separation," << g6(o.separation) << '\n';
  const bool ok = o.separation >= f.min_separation;
  std::cerr << "separation " << g6(o.separation) << " (required >= "
            << g6(f.min_separation) << "): " << (ok ? "ok" : "FAILED") << "\n";
  return ok ? kOk : kCheckFailed;
}

int run_gradcheck(const Common& c) {
  const auto results = sepc::run_gradcheck_suites(c.seed);
  Report out(c.out);
  std::ostream& os = out.stream();
  os << "suite,max_rel_error,tolerance,status\n";
  bool ok = true;
  for (const sepc::GradcheckResult& r : results) {
    os << r.suite << ',' << g6(r.error) << ',' << g6(r.tolerance) << ','
       << (r.passed() ? "pass" : "fail") << '\n';
    ok = ok && r.passed();
  }
  return ok ? kOk : kCheckFailed;
}

struct DemoFlags {
  std::string input;
  std::string compare;
  std::size_t size = 32;
  std::size_t levels = 3;
  std::size_t batch = 1;
};

std::string shape_text(const sepc::FeaturePyramid& p) {
  std::ostringstream os;
  for (std::size_t l = 0; l < p.size(); ++l) {
    os << (l ? " " : "") << sepc::to_string(p[l].shape());
  }
  return os.str();
}

int run_demo_head(const Common& c, const HeadFlags& hf, const DemoFlags& f) {
  const sepc::KeyValueConfig kv = load_common_config(c);
  sepc::HeadConfig defaults;
  defaults.channels = 16;
  defaults.outputs = sepc::HeadOutputs{};
  defaults.seed = c.seed;
  const sepc::HeadConfig cfg = hf.resolve(kv, defaults);

  sepc::FeaturePyramid input;
  if (f.input.empty()) {
    sepc::Rng rng(c.seed);
    input = sepc::random_pyramid({f.batch, cfg.channels, f.size, f.size}, f.levels, rng);
  } else {
    input = sepc::FeaturePyramid(sepc::pyramid_read(f.input));
  }
  input.validate();

  sepc::HeadParams params = sepc::init_head(cfg, input.size());
  const sepc::HeadResult r = sepc::head_forward(input, cfg, params);
  if (!c.out.empty()) {
    sepc::pyramid_write(r.cls.levels, c.out + "_cls.spyr");
    sepc::pyramid_write(r.loc.levels, c.out + "_loc.spyr");
  }
  std::cout << "variant," << sepc::to_string(cfg.sepc_variant) << '\n'
            << "cls," << shape_text(r.cls) << '\n'
            << "loc," << shape_text(r.loc) << '\n';
  if (!f.compare.empty()) {
    sepc::HeadConfig other = cfg;
    other.sepc_variant = sepc::parse_sepc_variant(f.compare);
    sepc::HeadParams p2 = sepc::init_head(other, input.size());
    const sepc::HeadResult r2 = sepc::head_forward(input, other, p2);
    const double d = std::max(sepc::max_abs_diff(r.cls, r2.cls),
                              sepc::max_abs_diff(r.loc, r2.loc));
    std::cout << "max_abs_diff_vs_" << f.compare << ',' << g6(d) << '\n';
  }
  return kOk;
}

int run_correlate(const Common& c, const std::string& input) {
  const sepc::FeaturePyramid p(sepc::pyramid_read(input));
  const sepc::CorrelationMatrix m = sepc::correlation_matrix(p);
  Report out(c.out);
  sepc::write_correlation_csv(out.stream(), m);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pyramid convolution head toolkit: cost model, scale-space and "
               "equivariance checks, gradient checks and head demos.\n"
               "Synthetic inputs are seeded uniform noise in [-1, 1) pre-blurred "
               "with a Gaussian of variance t = 2.\n"
               "Exit status: 0 success, 1 check failure, 2 usage or input error."};
  app.require_subcommand(1);
  Common common;
  app.add_option("--seed", common.seed, "RNG seed")->capture_default_str();
  app.add_option("--out", common.out, "Report file (stdout when omitted)");
  app.add_option("--config", common.config, "key=value config file");
  auto global = [&](CLI::App* sub) {
    sub->fallthrough();
    return sub;
  };

  auto* flops = global(app.add_subcommand("flops", "Analytical head FLOPs report (CSV)"));
  HeadFlags flops_head;
  CostFlags flops_cost;
  bool flops_check = false;
  flops_head.add(*flops);
  flops_cost.add(*flops);
  flops->add_flag("--check", flops_check,
                  "Fail unless C_total and head_ratio match 1.4985 and 0.99925 "
                  "within 5e-4");

  auto* vss = global(app.add_subcommand("verify-scale-space",
                                        "Lemma-1 and semigroup discrepancies"));
  ScaleSpaceFlags ss;
  vss->add_option("--m", ss.m)->capture_default_str();
  vss->add_option("--n", ss.n)->capture_default_str();
  vss->add_option("--size", ss.size, "Synthetic image side")->capture_default_str();
  vss->add_option("--pre-blur", ss.pre_blur)->capture_default_str();
  vss->add_option("--s0", ss.s0)->capture_default_str();
  vss->add_option("--input", ss.input, "SPYT tensor instead of synthetic noise");
  vss->add_option("--lemma-tol", ss.lemma_tol, "Override the committed threshold");
  vss->add_option("--semigroup-tol", ss.semigroup_tol,
                  "Override the committed threshold");

  auto* eqv = global(app.add_subcommand(
      "equivariance", "Gaussian vs control pyramid equivariance errors"));
  EquivarianceFlags ef;
  eqv->add_option("--size", ef.size)->capture_default_str();
  eqv->add_option("--levels", ef.levels)->capture_default_str();
  eqv->add_option("--channels", ef.channels)->capture_default_str();
  eqv->add_option("--m", ef.m, "Level shift")->capture_default_str();
  eqv->add_option("--pre-blur", ef.pre_blur)->capture_default_str();
  eqv->add_option("--s0", ef.s0)->capture_default_str();
  eqv->add_option("--min-separation", ef.min_separation)->capture_default_str();
  eqv->add_flag("--constant", ef.constant, "Use a constant pyramid");

  auto* grad = global(app.add_subcommand("gradcheck", "Finite-difference VJP suites"));

  auto* demo = global(app.add_subcommand(
      "demo-head", "Run a head forward; --out PREFIX writes PREFIX_cls.spyr and "
                   "PREFIX_loc.spyr"));
  HeadFlags demo_head;
  DemoFlags df;
  demo_head.add(*demo);
  demo->add_option("--input", df.input, "SPYR feature pyramid");
  demo->add_option("--compare-variant", df.compare, "Second variant to diff against")
      ->check(CLI::IsMember({"none", "lite", "full"}));
  demo->add_option("--size", df.size, "Synthetic bottom-level side")->capture_default_str();
  demo->add_option("--levels", df.levels, "Synthetic levels")->capture_default_str();
  demo->add_option("--batch", df.batch)->capture_default_str();

  auto* corr = global(app.add_subcommand("correlate", "Level correlation matrix (CSV)"));
  std::string corr_input;
  corr->add_option("--input", corr_input, "SPYR feature pyramid")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*flops) return run_flops(common, flops_head, flops_cost, flops_check);
    if (*vss) return run_verify_scale_space(common, ss);
    if (*eqv) return run_equivariance(common, ef);
    if (*grad) return run_gradcheck(common);
    if (*demo) return run_demo_head(common, demo_head, df);
    if (*corr) return run_correlate(common, corr_input);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
