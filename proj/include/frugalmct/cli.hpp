#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace frugalmct::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kError = 1;
inline constexpr int kInfeasible = 2;

// Entry point behind the `frugalmct` binary. argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Same, with the arguments after the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace frugalmct::cli
