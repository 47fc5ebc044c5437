#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ccwnet {

inline constexpr const char* kVersion = "0.1.0";

/// Parses and runs one invocation. Returns 0 on success, 1 on a domain
/// error, 2 on a usage or configuration error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ccwnet
