#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace phifem {

// Entry point of the command-line tool.  `args` excludes the program name,
// e.g. {"solve", "problem.ini", "--out-dir", "run1"}.  Diagnostics and
// reports go to `out`.  Exit codes: 0 success/converged, 1 runtime error,
// 2 non-coercive descent, 3 stalled or iteration-capped solve, 64 bad usage
// or config parse error.
int run_cli(const std::vector<std::string> &args, std::ostream &out = std::cout);

} // namespace phifem
