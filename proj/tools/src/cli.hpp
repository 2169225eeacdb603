#pragma once

namespace bgch::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

/// Entry point of the `bgch` binary; returns the process exit code.
int run(int argc, const char* const* argv);

}  // namespace bgch::cli
