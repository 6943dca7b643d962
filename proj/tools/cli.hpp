#pragma once

#include <ostream>

namespace vfb::cli {

/// Runs one subcommand. Exit status 0 on success, 2 for usage or input
/// errors, 3 for numerical failures.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vfb::cli
