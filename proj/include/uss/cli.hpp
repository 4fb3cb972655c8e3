#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace uss::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitValidation = 2;

/// Runs one subcommand (params, run, attack, sweep, time-to-ready).
/// `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const char* version();

}  // namespace uss::cli
