// Copyright 2026 The EVE Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace eve {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or size mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf observed in a forward value, loss or gradient.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or corpus line.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure (open, read, write).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace eve
