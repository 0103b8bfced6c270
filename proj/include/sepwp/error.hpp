#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sepwp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LexError : public Error {
 public:
  LexError(std::size_t position, std::string character)
      : Error("unexpected character '" + character + "' at offset " + std::to_string(position)),
        position_(position),
        character_(std::move(character)) {}
  std::size_t position() const noexcept { return position_; }
  const std::string& character() const noexcept { return character_; }

 private:
  std::size_t position_;
  std::string character_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t position, std::string expected)
      : Error("parse error at offset " + std::to_string(position) + ": expected " + expected),
        position_(position),
        expected_(std::move(expected)) {}
  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

class UnknownIdentifier : public Error {
 public:
  explicit UnknownIdentifier(std::string name)
      : Error("unknown identifier '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Domain fault during evaluation (division by zero, NaN, overflow).
class EvalError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t got)
      : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
              std::to_string(got)) {}
};

class NotSupported : public Error {
 public:
  using Error::Error;
};

/// Sampling was requested on an unbounded set that has no window.
class Unbounded : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class EmptyCloud : public Error {
 public:
  EmptyCloud() : Error("point cloud is empty") {}
};

class Infeasible : public Error {
 public:
  explicit Infeasible(std::string which)
      : Error("point is not in " + which), which_(std::move(which)) {}
  const std::string& which() const noexcept { return which_; }

 private:
  std::string which_;
};

class EmptyApproxSet : public Error {
 public:
  explicit EmptyApproxSet(double epsilon)
      : Error("no grid point certified in S(" + std::to_string(epsilon) + ")"), epsilon_(epsilon) {}
  double epsilon() const noexcept { return epsilon_; }

 private:
  double epsilon_;
};

/// Invalid problem configuration; key names the offending JSON path.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("config error at '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace sepwp
