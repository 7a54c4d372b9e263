#pragma once

#include <ostream>

namespace mgp {

/// Entry point of the `mgp` command-line tool. Results go to files or `out`,
/// diagnostics to `err`. Returns 0 on success, 1 on usage or input errors
/// and 2 when a numerical failure stops the computation.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mgp
