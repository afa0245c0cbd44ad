#ifndef SIGLOOP_IO_CLI_HPP
#define SIGLOOP_IO_CLI_HPP

#include <iosfwd>

namespace sigloop::io {

// Full command-line front end.  Deterministic output goes to `out` (reports,
// tables, summaries); human-oriented notes and errors go to `err`.
// Returns 0 on success, 2 on input errors, 3 on numerical failures, 4 on
// validation failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sigloop::io

#endif
