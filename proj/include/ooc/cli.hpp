#pragma once

#include <string>
#include <vector>

namespace ooc::cli {

// Parses argv and dispatches to a subcommand. Exit codes: 0 success,
// 1 usage/flag error, 2 file/parse/validation error, 3 remote/detector
// error, 4 numeric error. All output files are written atomically.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // args without the program name

}  // namespace ooc::cli
