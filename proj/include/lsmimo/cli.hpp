#pragma once

#include <ostream>

namespace lsmimo {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitConvergence = 3,
  kExitNumerical = 4,
  kExitCheckFailed = 5,
};

/// Parses argv, runs one command and writes its CSVs plus manifest.json under --out.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lsmimo
