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

// Flat key=value configuration files.
//
//   file    := line*
//   line    := ws* (entry)? ws* ('#' any*)? '\n'
//   entry   := key ws* '=' ws* value
//   key     := [a-z_][a-z0-9_]*
//   value   := any non-'#' characters, trailing whitespace trimmed
//
// Keys may appear at most once. Booleans accept true/false/1/0/yes/no/on/off.

#ifndef SEPC_CONFIG_HPP_
#define SEPC_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <string_view>

#include "sepc/flops.hpp"
#include "sepc/head.hpp"

namespace sepc {

struct ConfigEntry {
  std::string value;
  std::size_t line = 0;
};

using KeyValueConfig = std::map<std::string, ConfigEntry, std::less<>>;

KeyValueConfig parse_config(std::istream& in);
KeyValueConfig parse_config_text(std::string_view text);
KeyValueConfig load_config(const std::string& path);

/// Head keys: stacks, channels, combined, extra_conv, pyramid_conv, bn_mode
/// (off|single|independent|integrated), sepc_variant, num_classes, anchors,
/// seed. num_classes / anchors enable the output convolutions.
void apply_head_config(const KeyValueConfig& kv, HeadConfig& cfg);

/// Cost-model keys: image_c, image_h, image_w, first_level, levels,
/// channels, kernel_h, kernel_w, size_mode, include_upsample.
void apply_cost_model_config(const KeyValueConfig& kv, CostModelInput& inp);

/// Throws ConfigError naming the first key that neither applier accepts.
void reject_unknown_keys(const KeyValueConfig& kv);

std::uint64_t parse_uint(std::string_view key, std::string_view value);
bool parse_bool(std::string_view key, std::string_view value);

}  // namespace sepc

#endif  // SEPC_CONFIG_HPP_
