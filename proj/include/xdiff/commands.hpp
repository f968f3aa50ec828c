#pragma once

#include "xdiff/config.hpp"

namespace xdiff {

// Exit-code contract shared with the CLI and CI:
//   0 all verdicts PASS / run completed
//   1 configuration or schema error
//   2 at least one FAIL verdict
//   3 no FAIL but at least one INCONCLUSIVE verdict
//   4 Newton divergence
enum ExitCode {
  kExitOk = 0,
  kExitConfig = 1,
  kExitFail = 2,
  kExitInconclusive = 3,
  kExitSolver = 4,
};

int run_check(const RunSettings& s);
int run_simulate(const RunSettings& s);
int run_twin(const RunSettings& s);
int run_sweep(const RunSettings& s);

}  // namespace xdiff
