// Command-line entry point: load or generate the pair, run the solver,
// and emit a machine-readable report. Exposed as a function so tests can
// drive it in-process.
#pragma once

#include <iosfwd>

#include "cpfjd/report.hpp"

namespace cpfjd {

/// Exit codes: 0 all components converged, 2 usage or input error,
/// 3 partial result (not all components converged), 4 output I/O error.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace cpfjd
