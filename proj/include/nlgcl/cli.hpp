#pragma once

#include <string>
#include <vector>

namespace nlgcl {

/// Entry point for the `nlgcl` tool. Returns the process exit code:
/// 0 success, 2 config error, 3 data error, 4 numeric failure.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace nlgcl
