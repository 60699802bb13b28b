#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tabletop::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

/// Runs one command. `args` excludes the program name. Options may also come
/// from `--config FILE` (a JSON object; command-line flags win).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tabletop::cli
