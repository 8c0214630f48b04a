#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace uwimg::cli {

// Run the command line (subcommands: enhance, estimate-bl, evaluate, bench,
// synth). Returns the process exit code: 0 success, 1 usage error, 2 runtime
// failure (unreadable input, I/O error, pipeline failure).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace uwimg::cli
