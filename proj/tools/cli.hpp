#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sslab::cli {

enum ExitCode { kOk = 0, kCheckFailed = 1, kUsage = 2, kResolution = 3 };

/// Runs one `sslab` invocation; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sslab::cli
