#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qspec::cli {

/// Exit codes of the command-line front end.
enum Exit : int { ok = 0, verify_failed = 1, bad_config = 2, solver_failed = 3 };

/// Runs one command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qspec::cli
