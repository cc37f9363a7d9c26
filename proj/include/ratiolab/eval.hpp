// Diagnostics over trained (or analytic) models: loss-landscape curve tables
// with CSV/SVG emission, log-ratio recovery error against analytic fixtures,
// variational divergence bounds vs closed-form/quadrature oracles, and
// mode-coverage statistics for mixture targets.

#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

#include "ratiolab/f_divergences.hpp"
#include "ratiolab/nets.hpp"
#include "ratiolab/prob.hpp"

namespace ratiolab {

// Per-curve generator-loss landscape over log r. Values are shifted so every
// curve passes through 0 at log r = 0 (for "gan" this subtracts f(1) =
// -log 4; the others already vanish there); slopes are derivatives with
// respect to log r and are unaffected by the shift.
//
// Alongside the f curves there is a "nonsaturating" comparison curve
// -log(r/(r+1)) - log 2, the alternative generator objective, whose slope is
// -1/(r+1).
struct CurveTable {
  Eigen::VectorXd log_r;             // strictly increasing
  std::vector<std::string> curves;   // column names
  Eigen::MatrixXd value;             // grid x curves
  Eigen::MatrixXd slope;             // grid x curves, d value / d log r
};

Eigen::VectorXd default_log_r_grid();  // 1001 uniform points on [-5, 5]

CurveTable emit_f_curves(const std::vector<FDiv>& specs, const Eigen::VectorXd& log_r);

// Long-format CSV: curve,log_r,value,slope — one row per curve per grid point.
void write_curves_csv(std::ostream& out, const CurveTable& table);
// Minimal static SVG rendering (axes, one polyline per curve, legend).
void write_curves_svg(std::ostream& out, const CurveTable& table);

// mean |log r_model(x) - log(p(x)/q(x))| over grid rows.
double ratio_recovery_error(const RatioNet& ratio, const DistSpec& p, const DistSpec& q,
                            const Eigen::MatrixXd& grid);

// n uniformly spaced 1-D points on [lo, hi], as an n x 1 grid.
Eigen::MatrixXd uniform_grid_1d(double lo, double hi, Eigen::Index n);

// Monte-Carlo variational lower bound mean(t(X_p)) - mean(f*(t(X_q))) with
// t = f'(r_model), against the analytic divergence (closed form for kl on
// Gaussians, quadrature otherwise; kl and pearson_chi2 only).
struct DivergenceGap {
  double bound = 0.0;
  double analytic = 0.0;
  double gap = 0.0;        // analytic - bound; >= 0 up to MC noise
  double std_error = 0.0;  // MC standard error of the bound
};

DivergenceGap divergence_gap(FDiv kind, const RatioNet& ratio, const DistSpec& p,
                             const DistSpec& q, Eigen::Index n, RngState& rng);

// A component is covered when at least cover_fraction of the points fall
// within `radius` of its mean; histogram assigns every point to its nearest
// component mean.
struct ModeCoverage {
  int covered = 0;
  std::vector<long> histogram;          // nearest-component counts
  std::vector<double> within_fraction;  // fraction of points within radius, per component
};

ModeCoverage mode_coverage(const Eigen::MatrixXd& generated, const MixtureSpec& mix,
                           double radius, double cover_fraction = 0.01);

}  // namespace ratiolab
