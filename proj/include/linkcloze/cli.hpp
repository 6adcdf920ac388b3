#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace linkcloze {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitMismatch = 4;

// Runs the `linkcloze` command line (synth, prepare, train, evaluate,
// compare) and returns the process exit code. Reports go to `out`,
// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace linkcloze
