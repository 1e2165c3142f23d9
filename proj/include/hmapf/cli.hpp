#pragma once

#include <string>
#include <vector>

namespace hmapf {

// gen-map / run / sweep front end. Exit codes: 0 success, 1 usage or
// config error, 2 all episodes failed.
int cli_main(const std::vector<std::string>& args);

}  // namespace hmapf
