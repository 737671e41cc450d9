#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace solar {

/// Entry point of the `solar` tool. args excludes the program name.
/// Returns 0 on success, 1 on validation or usage errors, 2 on I/O errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace solar
