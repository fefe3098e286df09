#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace modekit {

enum class ErrorKind {
  invalid_argument,
  invalid_signal,
  signal_too_short,
  too_few_extrema,
  length_mismatch,
  index_out_of_range,
  zero_variance,
  empty_decomposition,
  aliasing_violation,
  parse_error,
  empty_file,
  io_error,
};

/// Stable snake_case tag, used in machine-readable CLI errors and sweep rows.
std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace modekit
