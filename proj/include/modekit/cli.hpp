#pragma once

#include <iosfwd>

namespace modekit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartialFailure = 1;
inline constexpr int kExitConfigError = 2;

/// Entry point of the `modekit` command (decompose | sweep | report).
/// Configuration and parse failures print {"error": tag, "message": text}
/// on `err` and return kExitConfigError before any computation.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace modekit
