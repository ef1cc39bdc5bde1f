#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ionfilter::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kNumericalError = 3,
  kUndesignable = 4,
};

/// Runs the ionfilter command line. Results go to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ionfilter::cli
