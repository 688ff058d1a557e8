#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hydroloop/lti.hpp"

namespace hydroloop::cli {

enum ExitCode : int {
    ok = 0,
    infeasible = 2,
    unstable = 3,
    network = 4,
    bad_data = 5,
};

// Default grid, with the point count taken from HYDROLOOP_GRID when set.
lti::FrequencyGrid grid_from_env();

// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hydroloop::cli
