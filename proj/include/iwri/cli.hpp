#pragma once

#include <iosfwd>

namespace iwri {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

/// Entry point of the `iwri` tool. Returns 0 on success, 1 on configuration or
/// usage errors and 2 on numerical failure.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_dispatch(int argc, const char* const* argv);

}  // namespace iwri
