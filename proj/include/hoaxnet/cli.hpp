#pragma once

#include <iosfwd>

namespace hoaxnet {

// Entry point of the hoaxnet command. Returns 0 on success, 1 on runtime
// failure and 2 on usage or configuration errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hoaxnet
