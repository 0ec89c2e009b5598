// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace nepspace {

/// Base class for all errors thrown by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A dense decomposition (QZ, SVD, ...) failed to converge.
class DecompositionError : public Error {
public:
  DecompositionError(const std::string& what, long size)
      : Error(what + " (matrix size " + std::to_string(size) + ")"), size_(size) {}
  long size() const { return size_; }

private:
  long size_;
};

/// A matrix is singular to working precision.
class SingularMatrixError : public Error {
public:
  SingularMatrixError(const std::string& what, double cond_estimate)
      : Error(what + " (rcond " + std::to_string(cond_estimate) + ")"),
        rcond_(cond_estimate) {}
  double rcond() const { return rcond_; }

private:
  double rcond_;
};

/// Evaluation or factorization hit a pole / an eigenvalue of the resolvent.
class PoleError : public Error {
public:
  PoleError(const std::string& what, std::complex<double> where)
      : Error(what + " at s = (" + std::to_string(where.real()) + ", " +
              std::to_string(where.imag()) + ")"),
        where_(where) {}
  std::complex<double> where() const { return where_; }

private:
  std::complex<double> where_;
};

/// Malformed input file (Matrix Market, ...), with the offending line.
class ParseError : public Error {
public:
  ParseError(const std::string& path, long line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

/// Run configuration violates the schema; carries the offending field path.
class ConfigError : public Error {
public:
  ConfigError(const std::string& field, const std::string& what)
      : Error("config field '" + field + "': " + what), field_(field) {}
  const std::string& field() const { return field_; }

private:
  std::string field_;
};

}  // namespace nepspace
