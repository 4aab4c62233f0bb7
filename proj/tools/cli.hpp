#pragma once

#include <iosfwd>

namespace becmode::cli {

/// Parses argv and runs one subcommand. Returns the process exit code:
/// 0 success, 2 bad parameters, 3 numerical failure, 4 I/O, 1 otherwise.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace becmode::cli
