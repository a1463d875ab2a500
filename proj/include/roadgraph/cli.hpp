#pragma once

#include <iosfwd>

namespace roadgraph::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kBadInput = 2,     // unparsable flags or files, missing files
  kConstraint = 3,   // validation, configuration or layout failures
};

// Runs one `roadgraph <subcommand> ...` invocation. Normal output goes to
// `out` (a RunReport JSON document with --json), diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace roadgraph::cli
