// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace slp::cli {

// Entry points of the two executables. Both return the process exit code and
// write results to `out`, diagnostics to `err`.
int slp_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int dpcir_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace slp::cli
