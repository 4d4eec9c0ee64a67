// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace panfuse {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input values violate an operation's precondition (ranges, normalization).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Structural precondition of a call was not met (e.g. both modalities absent).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A function evaluation produced NaN or Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Synthetic scene could not be generated.
class GenerationError : public Error {
 public:
  using Error::Error;
};

/// Malformed key-value configuration. `key()` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : "config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Malformed binary container. `offset()` is the byte position where decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace panfuse
