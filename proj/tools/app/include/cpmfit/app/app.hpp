#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cpmfit::app {

enum ExitCode : int { kSuccess = 0, kHardError = 1, kPartial = 2 };

// Entry point of the `cpmfit` tool. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace cpmfit::app
