#pragma once

// Command layer behind the fermi1d executable. Every command maps a
// validated RunConfig to a JSON document, an optional CSV table and an exit
// code: 0 success, 1 invalid configuration, 2 numerical non-convergence or
// failed verification.

#include <iosfwd>
#include <string>
#include <vector>

#include "fermi1d/config.hpp"
#include "fermi1d/io.hpp"

namespace fermi1d {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitNumerical = 2;

struct CommandResult {
  int exit_code = kExitOk;
  Json output;
  Table csv;  // empty header: nothing to write
};

CommandResult cmd_solve(const RunConfig& cfg);
CommandResult cmd_invert(const RunConfig& cfg);
CommandResult cmd_fll(const RunConfig& cfg);
CommandResult cmd_ks_scf(const RunConfig& cfg);
CommandResult cmd_verify(const std::string& scenario, const RunConfig& cfg);
CommandResult cmd_density_to_slater(const RunConfig& cfg);

/// Full command line: parses arguments, loads the configuration, runs the
/// command and writes JSON to --out (or `out`) and CSV to --csv (or the
/// configured path). Diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fermi1d
