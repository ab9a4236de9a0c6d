#pragma once

#include <iosfwd>

namespace kgp {

/// Exit codes returned by run_cli.
enum ExitCode : int {
    kExitOk = 0,
    kExitProblemError = 1,  // a problem could not be processed (transport, script, ...)
    kExitConfigError = 2,   // bad flags, missing inputs, toolchain unavailable
};

/// Entry point for the kgprove tool. Normal output goes to `out`,
/// diagnostics and progress to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kgp
