#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coveropt::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,      // unknown flag, bad flag value, bad config key
  kMissingFile = 3,
  kSchema = 4,
};

// Runs one command line (args excludes the program name). Progress goes to
// `out`; failures print a single `error code=N kind=K message="..."` line to
// `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coveropt::cli
