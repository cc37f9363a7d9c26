// Command implementations behind the command-line front end. Each command
// returns a process exit status (0 on success) and writes its artifacts under
// cfg.out_dir; unrecoverable problems raise std::runtime_error, which the
// front end prints as a single `error: ...` line.

#pragma once

#include <string>

#include "ratiolab/config.hpp"

namespace ratiolab {

// Adversarial or fixed-source training run; writes report.csv, summary.txt
// and (when enabled) ratio.ckpt / gen.ckpt.
int run_train(const RunConfig& cfg);

// Ratio-only estimation between data.source and data.gen_source; writes the
// training artifacts plus ratio_grid.csv for one-dimensional data.
int run_estimate_ratio(const RunConfig& cfg);

// Loss-landscape curves on the default grid; writes curves.csv + curves.svg.
int run_curves(const RunConfig& cfg);

// Finite-difference audit of every registered differentiable loss; exit 0
// iff the worst relative error stays below the audit tolerance.
int run_gradcheck(const RunConfig& cfg);

// Full acceptance suite with a pass/fail table; cli_path lets the
// determinism check re-invoke this binary.
int run_benchmark(const RunConfig& cfg, const std::string& cli_path);

// Dispatch by command name: train, estimate-ratio, curves, gradcheck,
// benchmark. Unknown names raise with the valid list.
int run_command(const std::string& command, const RunConfig& cfg,
                const std::string& cli_path = "");

}  // namespace ratiolab
