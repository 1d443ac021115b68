#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace shearmix {

/// Entry point of the `shearmix` tool; `args` excludes the program name.
/// Returns 0 on success, 2 on usage or configuration errors and 1 on
/// runtime failures.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shearmix
