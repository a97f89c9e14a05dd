#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace substate {

// Bad user input: malformed files, inconsistent labels, missing paths.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that is well-formed but outside an operation's domain
// (e.g. a zero-size stream, a label set without defects).
class DomainError : public InputError {
 public:
  using InputError::InputError;
};

class TraceParseError : public InputError {
 public:
  TraceParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}
  TraceParseError(const std::string& file, std::size_t line, const std::string& what)
      : InputError(file + ":" + std::to_string(line) + ": " + what), line_(line), detail_(what) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

class ConfigError : public InputError {
 public:
  ConfigError(std::string key, const std::string& what)
      : InputError("config key '" + key + "': " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Internal contract violated; maps to exit status 2 in the CLI.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace substate
