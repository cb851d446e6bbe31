#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace genremb {

enum class ErrorKind {
  parse,             // malformed input file
  invalid_argument,  // precondition violated by the caller
  not_found,         // unknown id or missing file
  numerical,         // singular system, zero denominator, degenerate matrix
  io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

// Single exception type for the library. Parse errors carry the 1-based
// line number of the offending input line.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(format(kind, message, line)),
        kind_(kind),
        line_(line),
        message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  const std::string& message() const noexcept { return message_; }

 private:
  static std::string format(ErrorKind kind, const std::string& message,
                            std::optional<std::size_t> line) {
    std::string out(to_string(kind));
    if (line) out += " (line " + std::to_string(*line) + ")";
    out += ": ";
    out += message;
    return out;
  }

  ErrorKind kind_;
  std::optional<std::size_t> line_;
  std::string message_;
};

}  // namespace genremb
