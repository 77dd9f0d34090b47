#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uekit {

// Error categories. Each maps to a distinct CLI exit code.
enum class ErrorKind {
  kUsage = 2,
  kUnknownMethod = 3,
  kMalformedInput = 4,
  kMissingChannel = 5,
  kIo = 6,
  kCheckpoint = 7,
  kDomain = 8,
};

std::string_view error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace uekit
