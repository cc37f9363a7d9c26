// The acceptance suite: twelve self-contained checks covering gradient
// correctness, the convex-duality identities tying the loss families
// together, analytic-fixture recovery, landscape flatness, end-to-end
// adversarial training, determinism, and estimator sanity. Each check
// returns pass/fail plus a one-line metric summary; thresholds and training
// hyperparameters are frozen here as named constants.

#pragma once

#include <string>
#include <vector>

namespace ratiolab {

namespace bench_constants {

// Gradient checks.
inline constexpr double kGradTol = 1e-5;
inline constexpr int kGradSeeds = 100;

// Identity tolerances.
inline constexpr double kConjugateTol = 1e-9;
inline constexpr double kBregmanAgreementTol = 1e-9;
inline constexpr double kExactPairTol = 1e-12;

// Gaussian-pair ratio recovery (standard normal vs unit-variance mean-1).
inline constexpr int kRecoverySamplesPerClass = 10000;
inline constexpr int kRecoverySteps = 2000;
inline constexpr int kRecoveryBatch = 1024;
inline constexpr double kRecoveryLr = 3e-3;
inline constexpr double kRecoveryMaeMax = 0.1;
inline constexpr double kBoundRelErrMax = 0.10;
inline constexpr int kBoundSamples = 100000;

// Ring-of-Gaussians end-to-end run.
inline constexpr int kRingModes = 8;
inline constexpr double kRingRadius = 2.0;
inline constexpr double kRingSigma = 0.05;
inline constexpr long kRingIterations = 12000;
inline constexpr int kRingBatch = 256;
inline constexpr double kRingLr = 1e-3;
inline constexpr double kRingBeta1 = 0.5;
inline constexpr double kRingInstanceNoise = 0.1;
inline constexpr int kRingEvalSamples = 2000;
inline constexpr double kRingMmdMax = 0.05;
inline constexpr int kRingCoverageMin = 6;
inline constexpr double kRingCoverRadius = 2.0 * kRingSigma;
inline constexpr double kRingCoverFraction = 0.01;

// Indistinguishable-populations fixed point.
inline constexpr long kMirrorIterations = 500;
inline constexpr double kMirrorLossBand = 0.05;
inline constexpr double kMirrorDiscBand = 0.05;

// MMD estimator sanity.
inline constexpr int kMmdResamples = 200;
inline constexpr int kMmdResampleN = 500;

}  // namespace bench_constants

struct BenchResult {
  std::string name;
  bool passed = false;
  double seconds = 0.0;
  double limit_seconds = 0.0;  // runtime budget included in pass/fail
  std::string detail;
};

struct BenchOptions {
  // Path to the command-line binary; when set, the determinism check runs
  // the real `train` and `curves` commands twice and compares artifact
  // bytes. When empty it falls back to in-process double runs.
  std::string cli_path;
  // Directory for determinism-check artifacts (created if missing).
  std::string scratch_dir = "bench_scratch";
};

int acceptance_count();
// index is 0-based; results appear in the fixed suite order.
BenchResult run_acceptance_case(int index, const BenchOptions& opts = {});
std::vector<BenchResult> run_acceptance(const BenchOptions& opts = {});

// One line per case: "PASS <name> <detail>" / "FAIL <name> <detail>".
std::string format_acceptance_line(const BenchResult& result);

}  // namespace ratiolab
