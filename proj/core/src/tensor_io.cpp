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

#include "sepc/tensor_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "sepc/error.hpp"

namespace sepc {
namespace {

constexpr std::array<char, 4> kTensorMagic = {'S', 'P', 'Y', 'T'};
constexpr std::array<char, 4> kPyramidMagic = {'S', 'P', 'Y', 'R'};
constexpr std::uint8_t kRank = 4;

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff),
                     static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff),
                     static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void put_f64(std::ostream& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void read_exact(std::istream& in, char* dst, std::size_t n, const char* what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw TruncatedError(std::string("truncated ") + what);
  }
}

std::uint8_t get_u8(std::istream& in, const char* what) {
  char b = 0;
  read_exact(in, &b, 1, what);
  return static_cast<std::uint8_t>(b);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  read_exact(in, reinterpret_cast<char*>(b), 4, what);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void expect_magic(std::istream& in, const std::array<char, 4>& magic,
                  const char* what) {
  std::array<char, 4> got{};
  in.read(got.data(), 4);
  if (in.gcount() != 4 || got != magic) {
    throw BadMagicError(std::string("bad ") + what + " magic");
  }
}

std::uint32_t checked_dim(std::size_t d) {
  if (d > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError("tensor dimension exceeds 32 bits");
  }
  return static_cast<std::uint32_t>(d);
}

void require_good(std::ostream& out, const std::filesystem::path& path) {
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

void write_tensor(std::ostream& out, const Tensor& t) {
  out.write(kTensorMagic.data(), 4);
  out.put(static_cast<char>(kTensorFormatVersion));
  out.put(static_cast<char>(kRank));
  put_u32(out, checked_dim(t.n()));
  put_u32(out, checked_dim(t.c()));
  put_u32(out, checked_dim(t.h()));
  put_u32(out, checked_dim(t.w()));
  for (double v : t.data()) put_f64(out, v);
}

Tensor read_tensor(std::istream& in) {
  expect_magic(in, kTensorMagic, "tensor");
  const std::uint8_t version = get_u8(in, "tensor header");
  if (version != kTensorFormatVersion) {
    throw VersionError("unsupported tensor format version " +
                       std::to_string(version));
  }
  const std::uint8_t rank = get_u8(in, "tensor header");
  if (rank != kRank) {
    throw FormatError("unsupported tensor rank " + std::to_string(rank));
  }
  Shape s;
  s.n = get_u32(in, "tensor header");
  s.c = get_u32(in, "tensor header");
  s.h = get_u32(in, "tensor header");
  s.w = get_u32(in, "tensor header");
  std::size_t count = 1;
  for (std::size_t d : {s.n, s.c, s.h, s.w}) {
    if (d != 0 &&
        count > std::numeric_limits<std::size_t>::max() / sizeof(double) / d) {
      throw FormatError("tensor element count overflows");
    }
    count *= d;
  }
  // Grow as the payload arrives so a corrupt header cannot force a huge
  // allocation before truncation is detected.
  std::vector<double> data;
  data.reserve(std::min<std::size_t>(s.numel(), std::size_t{1} << 20));
  for (std::size_t i = 0; i < s.numel(); ++i) {
    unsigned char b[8];
    read_exact(in, reinterpret_cast<char*>(b), 8, "tensor payload");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) {
      bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    }
    data.push_back(std::bit_cast<double>(bits));
  }
  return Tensor(s, std::move(data));
}

void tensor_write(const Tensor& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_tensor(out, t);
  require_good(out, path);
}

Tensor tensor_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_tensor(in);
}

void write_pyramid(std::ostream& out, const std::vector<Tensor>& levels) {
  if (levels.size() > 255) {
    throw FormatError("pyramid files hold at most 255 levels");
  }
  out.write(kPyramidMagic.data(), 4);
  out.put(static_cast<char>(kPyramidFormatVersion));
  out.put(static_cast<char>(levels.size()));
  for (const Tensor& t : levels) write_tensor(out, t);
}

std::vector<Tensor> read_pyramid(std::istream& in) {
  expect_magic(in, kPyramidMagic, "pyramid");
  const std::uint8_t version = get_u8(in, "pyramid header");
  if (version != kPyramidFormatVersion) {
    throw VersionError("unsupported pyramid format version " +
                       std::to_string(version));
  }
  const std::uint8_t count = get_u8(in, "pyramid header");
  std::vector<Tensor> levels;
  levels.reserve(count);
  for (std::uint8_t i = 0; i < count; ++i) levels.push_back(read_tensor(in));
  return levels;
}

void pyramid_write(const std::vector<Tensor>& levels,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_pyramid(out, levels);
  require_good(out, path);
}

std::vector<Tensor> pyramid_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_pyramid(in);
}

}  // namespace sepc
