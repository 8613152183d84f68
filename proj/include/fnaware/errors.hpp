#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fnaware {

// Bad argument values (mismatched filter layouts, out-of-range counts, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A caller broke a documented precondition (e.g. on_hit for an absent key).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Exhaustive solver asked to enumerate more subsets than it supports.
class SizeLimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Unreadable trace / snapshot input. line() is 0 when no line applies.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Configuration problems; field() names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace fnaware
