#pragma once

#include <stdexcept>
#include <string>

namespace vectors {

// Malformed textual input (payload ids, node ids, trace lines, config values).
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::string token)
      : std::runtime_error(what), token_(std::move(token)) {}

  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

// A caller broke an operation's documented precondition.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class MissingIdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vectors
