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

// Binary tensor and pyramid files.
//
// SPYT (one tensor):
//   bytes 0..3   "SPYT" (0x53 0x50 0x59 0x54)
//   byte  4      version, 1
//   byte  5      rank, 4
//   bytes 6..21  n, c, h, w as uint32 little-endian
//   then n*c*h*w IEEE-754 doubles, little-endian, row-major. No padding.
//
// SPYR (ordered list of tensors):
//   bytes 0..3   "SPYR"
//   byte  4      version, 1
//   byte  5      level count
//   then one SPYT record per level, in level order.

#ifndef SEPC_TENSOR_IO_HPP_
#define SEPC_TENSOR_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "sepc/tensor.hpp"

namespace sepc {

inline constexpr std::uint8_t kTensorFormatVersion = 1;
inline constexpr std::uint8_t kPyramidFormatVersion = 1;

void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in);

void tensor_write(const Tensor& t, const std::filesystem::path& path);
Tensor tensor_read(const std::filesystem::path& path);

void write_pyramid(std::ostream& out, const std::vector<Tensor>& levels);
std::vector<Tensor> read_pyramid(std::istream& in);

void pyramid_write(const std::vector<Tensor>& levels,
                   const std::filesystem::path& path);
std::vector<Tensor> pyramid_read(const std::filesystem::path& path);

}  // namespace sepc

#endif  // SEPC_TENSOR_IO_HPP_
