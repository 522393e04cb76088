#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bnv {

// Full command-line driver; args exclude the program name. Streams are
// injectable so tests can run subcommands in-process.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bnv
