#pragma once

#include <stdexcept>
#include <string>

namespace dbo {

// Configuration problems carry the offending line when known; they map to
// exit code 2 at the CLI boundary. Everything else std-derived maps to 3.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg
                                    : msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dbo
