#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mocrisk::cli {

/// Runs one command line (without the program name). Tables go to `out`,
/// diagnostics to `err`; returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mocrisk::cli
