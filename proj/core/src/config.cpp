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

#include "sepc/config.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "sepc/error.hpp"

namespace sepc {

namespace {

constexpr std::array<std::string_view, 10> kHeadKeys = {
    "stacks",       "channels",     "combined",    "extra_conv", "pyramid_conv",
    "bn_mode",      "sepc_variant", "num_classes", "anchors",    "seed"};

constexpr std::array<std::string_view, 10> kCostKeys = {
    "image_c",  "image_h",  "image_w",   "first_level", "levels",
    "channels", "kernel_h", "kernel_w",  "size_mode",   "include_upsample"};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(std::string_view k) {
  if (k.empty() || !(k[0] == '_' || (k[0] >= 'a' && k[0] <= 'z'))) return false;
  for (char c : k) {
    if (!(c == '_' || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'))) {
      return false;
    }
  }
  return true;
}

const ConfigEntry* find(const KeyValueConfig& kv, std::string_view key) {
  const auto it = kv.find(key);
  return it == kv.end() ? nullptr : &it->second;
}

std::string where(std::string_view key, const ConfigEntry& e) {
  return "config line " + std::to_string(e.line) + ", key '" +
         std::string(key) + "'";
}

}  // namespace

std::uint64_t parse_uint(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (value.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError("'" + std::string(key) +
                      "' expects a non-negative integer, got '" +
                      std::string(value) + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") {
    return true;
  }
  if (value == "false" || value == "0" || value == "no" || value == "off") {
    return false;
  }
  throw ConfigError("'" + std::string(key) + "' expects a boolean, got '" +
                    std::string(value) + "'");
}

KeyValueConfig parse_config(std::istream& in) {
  KeyValueConfig kv;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = raw;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) {
      s = s.substr(0, hash);
    }
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line) +
                        ": expected key = value");
    }
    const std::string_view key = trim(s.substr(0, eq));
    const std::string_view value = trim(s.substr(eq + 1));
    if (!valid_key(key)) {
      throw ConfigError("config line " + std::to_string(line) +
                        ": invalid key '" + std::string(key) + "'");
    }
    if (kv.contains(key)) {
      throw ConfigError("config line " + std::to_string(line) +
                        ": duplicate key '" + std::string(key) + "'");
    }
    kv.emplace(std::string(key), ConfigEntry{std::string(value), line});
  }
  return kv;
}

KeyValueConfig parse_config_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_config(in);
}

KeyValueConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

void apply_head_config(const KeyValueConfig& kv, HeadConfig& cfg) {
  auto get = [&](std::string_view key, auto&& apply) {
    if (const ConfigEntry* e = find(kv, key)) {
      try {
        apply(e->value);
      } catch (const ConfigError& err) {
        throw ConfigError(where(key, *e) + ": " + err.what());
      }
    }
  };
  get("stacks", [&](const std::string& v) { cfg.stacks = parse_uint("stacks", v); });
  get("channels",
      [&](const std::string& v) { cfg.channels = parse_uint("channels", v); });
  get("combined",
      [&](const std::string& v) { cfg.combined = parse_bool("combined", v); });
  get("extra_conv",
      [&](const std::string& v) { cfg.extra_conv = parse_bool("extra_conv", v); });
  get("pyramid_conv", [&](const std::string& v) {
    cfg.pyramid_conv = parse_bool("pyramid_conv", v);
  });
  get("bn_mode", [&](const std::string& v) {
    if (v == "off" || v == "none") {
      cfg.bn_mode.reset();
    } else {
      cfg.bn_mode = parse_bn_mode(v);
    }
  });
  get("sepc_variant",
      [&](const std::string& v) { cfg.sepc_variant = parse_sepc_variant(v); });
  get("num_classes", [&](const std::string& v) {
    if (!cfg.outputs) cfg.outputs = HeadOutputs{};
    cfg.outputs->num_classes = parse_uint("num_classes", v);
  });
  get("anchors", [&](const std::string& v) {
    if (!cfg.outputs) cfg.outputs = HeadOutputs{};
    cfg.outputs->anchors = parse_uint("anchors", v);
  });
  get("seed", [&](const std::string& v) { cfg.seed = parse_uint("seed", v); });
  cfg.validate();
}

void apply_cost_model_config(const KeyValueConfig& kv, CostModelInput& inp) {
  auto uint_key = [&](std::string_view key, std::size_t& field) {
    if (const ConfigEntry* e = find(kv, key)) {
      try {
        field = parse_uint(key, e->value);
      } catch (const ConfigError& err) {
        throw ConfigError(where(key, *e) + ": " + err.what());
      }
    }
  };
  uint_key("image_c", inp.image_c);
  uint_key("image_h", inp.image_h);
  uint_key("image_w", inp.image_w);
  uint_key("first_level", inp.first_level);
  uint_key("levels", inp.levels);
  uint_key("channels", inp.channels);
  uint_key("kernel_h", inp.kernel_h);
  uint_key("kernel_w", inp.kernel_w);
  if (const ConfigEntry* e = find(kv, "size_mode")) {
    try {
      inp.size_mode = parse_size_mode(e->value);
    } catch (const ConfigError& err) {
      throw ConfigError(where("size_mode", *e) + ": " + err.what());
    }
  }
  if (const ConfigEntry* e = find(kv, "include_upsample")) {
    inp.include_upsample = parse_bool("include_upsample", e->value);
  }
  inp.validate();
}

void reject_unknown_keys(const KeyValueConfig& kv) {
  for (const auto& [key, entry] : kv) {
    bool known = false;
    for (auto k : kHeadKeys) known = known || k == key;
    for (auto k : kCostKeys) known = known || k == key;
    if (!known) throw ConfigError(where(key, entry) + ": unknown key");
  }
}

}  // namespace sepc
