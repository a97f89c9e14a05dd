#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace substate::cli {

// Runs one command line (args[0] is the program name) and returns the exit
// status: 0 success, 1 input or configuration error, 2 internal error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace substate::cli
