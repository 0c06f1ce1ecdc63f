#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sheetscape {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitUsageError = 2;

/// Runs one invocation, e.g. {"scene", "--in", "t.csv", "--gltf", "t.glb"}
/// (without the program name). Diagnostics go to `err` as single lines
/// prefixed with "error:".
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sheetscape
