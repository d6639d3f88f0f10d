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

#include "sepc/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sepc/error.hpp"
#include "sepc/upsample.hpp"

namespace sepc {

Tensor resize_to_bottom(const FeaturePyramid& p, std::size_t l) {
  Tensor x = p[l];
  for (std::size_t k = l; k-- > 0;) {
    x = fit_top_left(upsample_bilinear_x2(x), p[k].h(), p[k].w());
  }
  return x;
}

namespace {

struct Centered {
  std::vector<double> values;
  double norm = 0.0;
};

Centered center(const Tensor& x, std::size_t n) {
  const std::size_t per = x.c() * x.h() * x.w();
  const double* src = x.plane(n, 0);
  double mean = 0.0;
  for (std::size_t i = 0; i < per; ++i) mean += src[i];
  mean /= static_cast<double>(per);
  Centered c{std::vector<double>(per), 0.0};
  for (std::size_t i = 0; i < per; ++i) {
    c.values[i] = src[i] - mean;
    c.norm += c.values[i] * c.values[i];
  }
  c.norm = std::sqrt(c.norm);
  return c;
}

}  // namespace

CorrelationMatrix correlation_matrix(const FeaturePyramid& p) {
  p.validate();
  if (p.size() < 2) throw DomainError("correlation_matrix: need >= 2 levels");
  const std::size_t levels = p.size();
  std::vector<Tensor> resized;
  for (std::size_t l = 0; l < levels; ++l) resized.push_back(resize_to_bottom(p, l));

  CorrelationMatrix m;
  m.values.assign(levels, std::vector<double>(levels, 0.0));
  m.constant_level.assign(levels, false);
  const std::size_t batch = p.batch();
  for (std::size_t n = 0; n < batch; ++n) {
    std::vector<Centered> c;
    for (std::size_t l = 0; l < levels; ++l) {
      c.push_back(center(resized[l], n));
      if (c.back().norm == 0.0) m.constant_level[l] = true;
    }
    for (std::size_t i = 0; i < levels; ++i) {
      for (std::size_t j = i + 1; j < levels; ++j) {
        if (c[i].norm == 0.0 || c[j].norm == 0.0) continue;
        double s = 0.0;
        for (std::size_t k = 0; k < c[i].values.size(); ++k) {
          s += c[i].values[k] * c[j].values[k];
        }
        m.values[i][j] += std::clamp(s / (c[i].norm * c[j].norm), -1.0, 1.0);
      }
    }
  }
  for (std::size_t i = 0; i < levels; ++i) {
    m.values[i][i] = 1.0;
    for (std::size_t j = i + 1; j < levels; ++j) {
      m.values[i][j] /= static_cast<double>(batch);
      m.values[j][i] = m.values[i][j];
    }
  }
  return m;
}

void write_correlation_csv(std::ostream& os, const CorrelationMatrix& m) {
  char buf[64];
  for (const auto& row : m.values) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.6g", row[j]);
      os << (j ? "," : "") << buf;
    }
    os << '\n';
  }
  bool any = false;
  for (std::size_t l = 0; l < m.constant_level.size(); ++l) {
    if (!m.constant_level[l]) continue;
    os << (any ? "," : "constant,") << l;
    any = true;
  }
  if (any) os << '\n';
}

}  // namespace sepc
