#pragma once

#include <string>
#include <vector>

namespace coreset {

// Entry point behind main(): parses argv, runs one subcommand, and maps
// failures to exit codes (0 ok, 1 usage, 2 data/format, 3 numeric).
int dispatch(const std::vector<std::string>& args);
int dispatch(int argc, const char* const* argv);

}  // namespace coreset
