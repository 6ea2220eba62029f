#pragma once
#include <iosfwd>
#include <string>
#include <vector>

namespace lmg {

/// Command-line driver, callable in-process (args exclude the program name).
/// Exit codes: 0 success, 2 usage or configuration error, 3 one or more
/// experiment points or regression criteria failed.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace lmg
