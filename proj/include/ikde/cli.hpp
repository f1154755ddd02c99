#pragma once

#include <iosfwd>

namespace ikde {

// Entry point of the `ikde` tool. Subcommands: sample, estimate, experiment,
// probe-bias, probe-variance, probe-tangent.
// Returns 0 on success, 1 on runtime failure and 2 on usage or configuration errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ikde
