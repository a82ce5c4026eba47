#pragma once

#include <string>

namespace fxtriplet {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitRuntime = 1,
    kExitConfig = 2,
    kExitIo = 3,
    kExitManifestMismatch = 4,
};

inline constexpr const char* kToolVersion = "1.0.0";

int run_cli(int argc, char** argv);

}  // namespace fxtriplet
