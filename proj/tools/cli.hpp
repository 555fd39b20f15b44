#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace detect::cli {

enum ExitCode : int { kOk = 0, kDataError = 1, kUsageError = 2 };

/// Runs one `detect` invocation. `args` excludes the program name. Summaries
/// go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace detect::cli
