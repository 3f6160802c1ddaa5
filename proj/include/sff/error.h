// sff/error.h
//
// Copyright 2026 The sffser Authors
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

namespace sff {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (files, manifests, headers).
class FormatError : public Error {
 public:
  using Error::Error;
};

// A recognized container with an encoding we do not decode.
class UnsupportedCodecError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Invalid parameter values or parameter combinations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Matrix/tensor dimensions that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that is empty, too short, or degenerate.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace sff
