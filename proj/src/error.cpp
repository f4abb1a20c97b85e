#include "terracover/error.hpp"

#include <utility>

namespace terracover {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::io:
      return "io";
    case ErrorKind::validation:
      return "validation";
    case ErrorKind::out_of_extent:
      return "out_of_extent";
    case ErrorKind::planning:
      return "planning";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, std::string module, std::string operation,
             const std::string& message, std::optional<std::size_t> index)
    : std::runtime_error(message),
      kind_(kind),
      module_(std::move(module)),
      operation_(std::move(operation)),
      index_(index) {}

}  // namespace terracover
