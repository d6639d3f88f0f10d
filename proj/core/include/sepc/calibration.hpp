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

// Golden thresholds produced by tools/calibrate and committed as
// data/calibration.txt (key=value, same grammar as head configs). The file is
// compiled into the library so installed binaries need no data directory.

#ifndef SEPC_CALIBRATION_HPP_
#define SEPC_CALIBRATION_HPP_

#include <string>
#include <string_view>

#include "sepc/config.hpp"

namespace sepc {

class Calibration {
 public:
  explicit Calibration(KeyValueConfig kv) : kv_(std::move(kv)) {}

  bool contains(std::string_view key) const { return kv_.contains(key); }
  double real(std::string_view key) const;
  std::uint64_t integer(std::string_view key) const;
  const KeyValueConfig& entries() const { return kv_; }

 private:
  KeyValueConfig kv_;
};

/// The calibration file embedded at build time.
const Calibration& committed_calibration();
std::string_view committed_calibration_text();

}  // namespace sepc

#endif  // SEPC_CALIBRATION_HPP_
