#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace metamodel::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,  // malformed input, IO or usage error
  kAmbiguity = 2,
  kNoMorphism = 3,
  kDepthExceeded = 4,
};

/// Runs the command line `args` (without the program name). The requested
/// artifact goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace metamodel::cli
