#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qsep::cli {

/// Exit codes: 0 certified or solved, 1 usage or evaluation error, 2 refuted
/// (or a suite hypothesis failed), 3 theorem violation.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitRefuted = 2;
inline constexpr int kExitTheoremViolation = 3;

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace qsep::cli
