#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pmx {

// The `pmx` command line. args excludes the program name.
// Returns 0 when clean, 1 on diagnostics or runtime errors, 2 on usage or IO errors.
int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pmx
