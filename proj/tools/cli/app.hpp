#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace osslc::cli {

// Entry point shared by the executable and the tests. args excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const EnvLookup& env = system_env());

}  // namespace osslc::cli
