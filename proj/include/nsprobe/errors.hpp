#pragma once

#include <stdexcept>
#include <string>

namespace nsprobe {

// Dimension outside what an exact/table-based routine supports.
class DimensionError : public std::runtime_error {
  public:
    explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

// A rejection/retry loop exhausted its configured budget.
class CapExceededError : public std::runtime_error {
  public:
    explicit CapExceededError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed function-DSL text. `position` is a byte offset when known, -1 otherwise.
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, long position = -1)
        : std::runtime_error(what), position_(position) {}
    long position() const { return position_; }

  private:
    long position_;
};

}  // namespace nsprobe
