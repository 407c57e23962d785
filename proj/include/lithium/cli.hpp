// The `lithium` command line, callable in-process for tests.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lithium::cli {

inline constexpr int kExitYes = 0;
inline constexpr int kExitNo = 1;
inline constexpr int kExitUnknown = 2;
inline constexpr int kExitInput = 3;

// args[0] is the program name. Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lithium::cli
