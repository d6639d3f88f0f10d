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

#include "sepc/calibration.hpp"

#include <cerrno>
#include <cstdlib>

#include "calibration_data.inc"
#include "sepc/error.hpp"

namespace sepc {

double Calibration::real(std::string_view key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) {
    throw ConfigError("calibration: missing key '" + std::string(key) + "'");
  }
  const std::string& s = it->second.value;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno != 0) {
    throw ConfigError("calibration: '" + std::string(key) +
                      "' is not a real number: '" + s + "'");
  }
  return v;
}

std::uint64_t Calibration::integer(std::string_view key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) {
    throw ConfigError("calibration: missing key '" + std::string(key) + "'");
  }
  return parse_uint(key, it->second.value);
}

std::string_view committed_calibration_text() { return kCalibrationText; }

const Calibration& committed_calibration() {
  static const Calibration c(parse_config_text(kCalibrationText));
  return c;
}

}  // namespace sepc
