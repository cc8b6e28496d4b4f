#pragma once

#include <iosfwd>

namespace mavnav::cli {

enum ExitCode { kOk = 0, kInputError = 1, kMissionFailure = 2 };

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mavnav::cli
