#pragma once

#include <iosfwd>

namespace driftkan {

// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitNumeric = 3, kExitDomain = 4 };

// Entry point behind the `driftkan` executable.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace driftkan
