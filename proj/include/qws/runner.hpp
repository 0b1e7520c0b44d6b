// SPDX-License-Identifier: Apache-2.0
#pragma once

// Executes an ExperimentConfig and renders its artifacts. Rendering is
// deterministic: the same config gives byte-identical text (the optional
// metadata block is the only time-dependent part).

#include "qws/config.hpp"

#include <string>

namespace qws {

  // Process exit statuses.
  inline constexpr int exit_ok = 0;
  inline constexpr int exit_verification_failed = 1;
  inline constexpr int exit_config = 2;
  inline constexpr int exit_numeric = 3;
  inline constexpr int exit_inconclusive = 4;

  struct RunOptions {
    unsigned threads = 1;
  };

  struct RunResult {
    int exit_code = exit_ok;
    std::string category = "ok";   // error category, "Inconclusive", "Fail" or "ok"
    std::string message;
    std::string primary;           // contents for output.path (or stdout)
    std::string staircase;         // levinson only: CSV (mu, A, staircase)
  };

  // Never throws for module errors; they become exit codes.
  RunResult execute(const ExperimentConfig& config, const RunOptions& opt = {});

  // execute() then write primary/staircase files. An empty output path sends
  // the primary artifact to stdout.
  RunResult run(const ExperimentConfig& config, const RunOptions& opt = {});

  // One-line machine-readable status: QWS-STATUS {"exit":..,"category":..,"message":..}
  std::string status_trailer(const RunResult& r);

}
