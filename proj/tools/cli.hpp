#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace proswitch::cli {

// Runs one CLI invocation; `args` excludes the program name. Returns the
// process exit code (0 ok, 2 input error, 3 transport error, 4 unsatisfiable
// plan, 1 other failures).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace proswitch::cli
