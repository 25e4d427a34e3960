#pragma once

#include <string>
#include <vector>

namespace parkcast::cli {

// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kDataError = 3;
inline constexpr int kDivergence = 4;

// Runs the full CLI on pre-split arguments (argv without the program name).
// Returns the process exit code instead of exiting, so tests can call it.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace parkcast::cli
