#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nctc::cli {

/// Entry point for the `nctc` tool. `args[0]` is the program name.
/// Data goes to `out`, diagnostics and errors to `err`. Returns the exit code.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace nctc::cli
