#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace trt::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_data = 2;
inline constexpr int exit_corruption = 3;

// Runs `trt <command> ...` with args[0] as the program name. Results go to
// `out`, diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trt::cli
