#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace svrsqp {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// The constraint Jacobian failed the JJ^T pivot test (numerically rank deficient).
class RankDeficientJacobian : public Error {
 public:
  using Error::Error;
};

/// Factorization of the assembled KKT system broke down.
class SingularKkt : public Error {
 public:
  using Error::Error;
};

/// A Cholesky pivot fell below the positive-definiteness tolerance.
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

/// ‖c‖₁ = 0 with a positive curvature term: signals a KKT-solve accuracy failure.
class DegenerateDirection : public Error {
 public:
  using Error::Error;
};

/// Malformed input text. Carries the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("parse error at line " + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// More than two distinct labels in a binary classification source.
class LabelError : public Error {
 public:
  using Error::Error;
};

/// Invalid or unknown configuration entry. Carries the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& reason)
      : Error("config error [" + key + "]: " + reason), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Aggregation requires at least two runs.
class InsufficientRuns : public Error {
 public:
  using Error::Error;
};

}  // namespace svrsqp
