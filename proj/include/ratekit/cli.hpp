#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ratekit {

/// Exit codes: 0 success, 1 usage or configuration error, 2 infeasible
/// synthesis under --strict.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version_string();

}  // namespace ratekit
