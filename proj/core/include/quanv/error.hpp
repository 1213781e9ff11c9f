// Copyright 2026 The quanvnet Authors.
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

namespace quanv {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A dimension or element count is unusable (kernel larger than image,
/// register too large, empty input, ...).
class SizeError : public Error {
  public:
    using Error::Error;
};

/// An argument violates a precondition that is not a pure size constraint
/// (non-finite angle, out-of-range qubit, duplicate targets, ...).
class ArgumentError : public Error {
  public:
    using Error::Error;
};

/// A value falls outside its documented range (pixel not in [0,1], ...).
class RangeError : public Error {
  public:
    using Error::Error;
};

/// Tensor shapes are mutually inconsistent.
class ShapeError : public Error {
  public:
    using Error::Error;
};

/// A run configuration cannot be satisfied (single-class dataset, ...).
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// A serialized artifact failed validation. `field` names what broke
/// ("magic", "version", "crc", "truncated", "shape").
class CorruptionError : public Error {
  public:
    CorruptionError(std::string field, const std::string& what)
        : Error(what), field_(std::move(field)) {}

    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

/// The library detected a violation of one of its own invariants
/// (state-vector norm drift past tolerance). Indicates a bug, not bad input.
class InternalError : public Error {
  public:
    using Error::Error;
};

}  // namespace quanv
