// Central-difference gradient verification against the tape's reverse pass.

#pragma once

#include <span>

#include "ratiolab/tape.hpp"

namespace ratiolab {

struct GradCheckResult {
  double max_rel_error = 0.0;
  // Flat coordinate (across the given leaves, in order) where the worst
  // error occurred.
  Eigen::Index worst_coord = -1;
};

// Compares the reverse-mode gradient of `output` with central differences
// taken by perturbing every entry of every leaf in `params` by +/- h and
// replaying the tape. Relative error uses a max(1, |g|) denominator.
//
// The tape must be clean (replayed) on entry; leaf values are restored before
// returning. Throws std::invalid_argument for h outside [1e-7, 1e-3] and
// std::runtime_error naming the coordinate if either gradient is NaN.
GradCheckResult finite_diff_check(ad::Tape& tape, ad::Var output,
                                  std::span<const ad::Var> params, double h = 1e-5);

}  // namespace ratiolab
