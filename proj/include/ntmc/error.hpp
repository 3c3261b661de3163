// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ntmc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Point outside the closure of the domain, or a zero velocity.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Bad or inconsistent configuration. `key` is the dotted path when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg, std::string key = {})
      : Error(key.empty() ? msg : key + ": " + msg), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Population cap exceeded; partial results are invalid.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Query past the end of a trajectory.
class OutOfLifeError : public Error {
 public:
  using Error::Error;
};

// h vanished at an interior evaluation point.
class SingularRateError : public Error {
 public:
  using Error::Error;
};

// All particles died (SMC) or the estimator was zero.
class ExtinctionError : public Error {
 public:
  using Error::Error;
};

}  // namespace ntmc
