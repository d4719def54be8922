#pragma once

#include <iosfwd>

namespace mmc::cli {

inline constexpr int kExitAllCorrect = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitMistakeFound = 3;

// Runs one mmc command. `serve` blocks until SIGINT or SIGTERM.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mmc::cli
