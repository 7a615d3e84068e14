#pragma once

#include <iosfwd>

namespace vdsa {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitCapacity = 3, kExitIo = 4 };

/// Parses arguments, runs one subcommand and maps failures onto ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vdsa
