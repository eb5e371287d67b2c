#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace philoscope::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInputError = 1;
inline constexpr int kVerifyDiff = 2;

// Runs one command line (without the program name) in-process.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace philoscope::cli
