#pragma once

#include <cstdint>
#include <string_view>

namespace mfgz {

inline constexpr const char* kToolVersion = "1.0.0";

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,  // bad flags, config parse errors, size limits
  kExitCfl = 3,
  kExitNumeric = 4,
  kExitGridExcursion = 5,
};

int run_cli(int argc, char** argv);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace mfgz
