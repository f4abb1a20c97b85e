#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace terracover {

enum class ErrorKind {
  io,             // unreadable or malformed files
  validation,     // inputs violate a precondition
  out_of_extent,  // a query left the terrain grid
  planning,       // the planner could not produce a usable result
};

const char* to_string(ErrorKind kind) noexcept;

/// Error raised by every module. Carries the module and operation that failed
/// and, where one exists, the index of the offending element (sample, point,
/// segment, lane).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, std::string operation,
        const std::string& message,
        std::optional<std::size_t> index = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& operation() const noexcept { return operation_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::string module_;
  std::string operation_;
  std::optional<std::size_t> index_;
};

}  // namespace terracover
