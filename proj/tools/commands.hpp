#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace denn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitInternal = 70;
// Library errors exit with their denn::Errc value (2..6).

/// Runs the `denn` command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace denn::cli
