#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lcdl::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 2;
inline constexpr int kDataError = 3;
inline constexpr int kNumericalError = 4;

/// Runs one command. `args` excludes the program name; args[0] is the
/// command (train, eval, predict, synth, report). Failures print a single
/// `E_<CATEGORY>: message` line to `err` and return the matching exit code.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace lcdl::cli
