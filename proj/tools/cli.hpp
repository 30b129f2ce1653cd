#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mlab::cli {

/// Runs one subcommand. args excludes the program name. Returns the exit
/// status; failures print {"error": kind, "message": text} to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mlab::cli
