#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rcdcm::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_threshold = 1,
  exit_usage = 2,
  exit_domain = 3,
  exit_numerical = 4
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace rcdcm::cli
