#pragma once

#include <stdexcept>
#include <string>

namespace wkam {

/// Bad argument to a library call (dimension mismatch, out-of-range size, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid configuration. Carries the offending key so the CLI can report it.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error("config error [" + key + "]: " + message),
        key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// A computation did not produce a usable result (no finite cycle,
/// non-converging fixed point, divergent root solve, empty Aubry set).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called before the state it depends on was prepared.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace wkam
