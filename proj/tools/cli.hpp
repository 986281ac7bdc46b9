#pragma once

#include <ostream>

namespace iup::cli {

// Runs the `iup` command line. Returns 0 on success, 1 on a runtime failure
// (one-line diagnostic on `err`) and 2 on a usage error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace iup::cli
