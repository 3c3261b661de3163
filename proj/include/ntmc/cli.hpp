// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace ntmc {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitResource = 3,
  kExitUndefined = 4,  // extinction or an undefined estimate
  kExitDomain = 5,
};

// Entry point of the ntmc command line tool. Human-readable progress goes
// to `err`; JSON results of oracle / planner / lambda runs go to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ntmc
