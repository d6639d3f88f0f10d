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

// Level-to-level correlation of a feature pyramid.
//
// Every level is brought to the bottom level's grid by repeated bilinear x2
// upsampling, fitted top-left to the next lower level after each step. Entry
// (i, j) is the Pearson correlation of levels i and j flattened over
// (c, h, w), averaged over the batch. A level with zero variance in some batch
// item correlates 0 with every other level for that item and is flagged.

#ifndef SEPC_CORRELATION_HPP_
#define SEPC_CORRELATION_HPP_

#include <ostream>
#include <vector>

#include "sepc/pyramid.hpp"

namespace sepc {

struct CorrelationMatrix {
  std::vector<std::vector<double>> values;
  std::vector<bool> constant_level;

  std::size_t size() const { return values.size(); }
  double operator()(std::size_t i, std::size_t j) const {
    return values[i][j];
  }
};

/// Level l resampled onto the bottom level's grid.
Tensor resize_to_bottom(const FeaturePyramid& p, std::size_t l);

CorrelationMatrix correlation_matrix(const FeaturePyramid& p);

/// L rows of L comma-separated values (6 significant digits), followed by a
/// `constant,<levels>` row when any level was flagged.
void write_correlation_csv(std::ostream& os, const CorrelationMatrix& m);

}  // namespace sepc

#endif  // SEPC_CORRELATION_HPP_
