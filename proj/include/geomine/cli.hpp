#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace geomine {

/// Exit codes: 0 success, 1 usage or input error, 2 data error (strict mode).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Edge table of a process map; the csv output of "discover".
std::string edges_to_csv(const struct ProcessMap& map);

} // namespace geomine
