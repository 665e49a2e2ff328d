#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ptq::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kSeedEnv = "PTQ_SEED";

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ptq::cli
