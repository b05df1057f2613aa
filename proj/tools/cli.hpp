#pragma once

#include <iosfwd>

namespace softgate::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

// Entry point of the `softgate` tool. Data goes to `out` when an output path
// is "-", diagnostics and summaries to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace softgate::cli
