#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dmpanim::cli {

/// Runs one command line (without the program name) and returns the exit
/// code: 0 ok, 1 usage, 2 parse, 3 learn, 4 validation, 5 numeric abort.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace dmpanim::cli
