#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gridguard::cli {

/// Runs one CLI invocation. args excludes the program name.
/// Exit codes: 0 success/clean, 3 corruption detected, 4 runtime error,
/// CLI11's own codes for usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gridguard::cli
