#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace graphtag {

// Runs one command line (args[0] is the program name). Returns the exit
// status; errors are reported on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace graphtag
