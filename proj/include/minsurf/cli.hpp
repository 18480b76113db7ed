#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace minsurf::cli {

enum ExitCode : int {
  kOk = 0,
  kViolations = 1,
  kInvalidInput = 2,
  kConvergenceFailure = 3,
  kIoError = 4,
};

/// Runs one command line (args excludes the program name). Reports go to the --out file if
/// given, otherwise to `out`; diagnostics and usage go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Reads "key = value" lines ('#' starts a comment) and returns "--key=value" arguments;
/// "true" gives a bare "--key" and "false" drops the key.
std::vector<std::string> config_arguments(const std::string& text);

}  // namespace minsurf::cli
