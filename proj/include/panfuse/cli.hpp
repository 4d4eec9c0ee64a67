// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace panfuse {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitFormat = 3,
};

/// Entry point of the `panfuse` tool. Subcommands: infer, eval, losses,
/// gradcheck, synth, drop-sim. Reports go to `out`, diagnostics to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace panfuse
