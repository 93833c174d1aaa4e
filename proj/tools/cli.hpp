#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ssbfsk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalidScheme = 2;
inline constexpr int kExitNotConverged = 3;

// Environment variable naming the default output directory.
inline constexpr const char* kOutDirVariable = "SSBFSK_OUT_DIR";

// Runs one subcommand. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace ssbfsk::cli
