#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace divaug::cli {

/// Exit codes: 0 success, 1 runtime error, 2 usage or configuration error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Entry point shared by the binary and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace divaug::cli
