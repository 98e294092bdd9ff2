#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace aperiodic::cli {

// args excludes the program name. Returns 0 on success, 1 on a computation
// error and 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace aperiodic::cli
