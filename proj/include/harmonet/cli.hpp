#pragma once

#include <string>
#include <vector>

namespace harmonet::cli {

/// Runs a harmonet command. Exit codes: 0 success, 1 negative computation
/// verdict (e.g. refused monopole on a recurrent network, diverging Green
/// series), 2 usage error, 3 numerical failure.
int run(const std::vector<std::string>& argv);

}  // namespace harmonet::cli
