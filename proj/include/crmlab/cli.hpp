#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crm {

/// Entry point of `crm-lab`. `args` excludes the program name.
/// Returns 0 on pass, 1 on a failed check or inconclusive diagnosis, 2 on
/// configuration or precondition errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crm
