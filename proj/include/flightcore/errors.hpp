#pragma once

#include <stdexcept>
#include <string>

namespace flightcore {

/// Thrown when a precondition on numeric inputs is broken (non-finite state,
/// invalid parameters). Never swallowed into NaNs.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Bad runtime argument (dt <= 0, length mismatch, degenerate bounds, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Configuration that cannot be realized, e.g. a singular allocation matrix
/// or an unknown key value in a config file.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace flightcore
