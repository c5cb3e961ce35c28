#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace epitrack::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_domain = 1,
    exit_environment = 2,
    exit_usage = 64,
};

/// Runs one `epitrack` invocation. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace epitrack::cli
