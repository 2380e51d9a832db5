#pragma once
#include <stdexcept>
#include <string>

namespace mdl {

// Exit codes used by the CLI: 2 usage, 3 domain, 4 capacity/precision, 5 internal.
struct Error : std::runtime_error {
  int code;
  Error(int c, const std::string& m) : std::runtime_error(m), code(c) {}
};
struct UsageError : Error {
  explicit UsageError(const std::string& m) : Error(2, m) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& m) : Error(3, m) {}
};
struct RangeError : Error {
  explicit RangeError(const std::string& m) : Error(3, m) {}
};
struct CapacityError : Error {
  explicit CapacityError(const std::string& m) : Error(4, m) {}
};
struct PrecisionError : Error {
  explicit PrecisionError(const std::string& m) : Error(4, m) {}
};

}  // namespace mdl
