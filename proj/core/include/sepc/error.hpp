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

#ifndef SEPC_ERROR_HPP_
#define SEPC_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace sepc {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes disagree. The message names the offending axis.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Output spatial extent would be < 1.
class DegenerateOutputError : public ShapeError {
 public:
  using ShapeError::ShapeError;
};

// Argument outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Spatial dims not divisible by the required power of two.
class DivisibilityError : public ShapeError {
 public:
  using ShapeError::ShapeError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Binary file format errors. Each failure mode has its own type.
class FormatError : public Error {
 public:
  using Error::Error;
};

class BadMagicError : public FormatError {
 public:
  using FormatError::FormatError;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace sepc

#endif  // SEPC_ERROR_HPP_
