#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace trea::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsage = 2, kIoError = 3 };

// Parses and runs one subcommand. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trea::cli
