#pragma once

#include <stdexcept>
#include <string>

namespace tailrisk {

/// Base error. The category maps onto the CLI exit codes.
class Error : public std::runtime_error {
 public:
  enum class Kind { Config = 2, Data = 3, Numerical = 4 };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  Kind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Kind::Config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(Kind::Data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(Kind::Numerical, what) {}
};

}  // namespace tailrisk
