#pragma once

#include <stdexcept>
#include <string>

namespace patternmark {

// Invalid parameters or an inconsistent configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Caller-supplied data broke an operation precondition, e.g. a distribution
// that does not sum to one (CLI exit code 2).
class ContractViolation : public std::runtime_error {
 public:
  explicit ContractViolation(const std::string& what) : std::runtime_error(what) {}
};

// Malformed external input: files, out-of-range token ids (CLI exit code 2).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace patternmark
