#include "ratiolab/finite_diff.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ratiolab {

GradCheckResult finite_diff_check(ad::Tape& tape, ad::Var output,
                                  std::span<const ad::Var> params, double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) {
    throw std::invalid_argument("finite_diff_check: h must lie in [1e-7, 1e-3]");
  }
  tape.backward(output);
  std::vector<Eigen::MatrixXd> analytic;
  analytic.reserve(params.size());
  for (const ad::Var& p : params) analytic.push_back(tape.grad(p));

  GradCheckResult result;
  Eigen::Index flat = 0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const ad::Var& p = params[pi];
    Eigen::MatrixXd base = p.value();
    for (Eigen::Index j = 0; j < base.size(); ++j, ++flat) {
      Eigen::MatrixXd bumped = base;
      bumped(j) = base(j) + h;
      tape.set_value(p, bumped);
      tape.replay();
      const double f_plus = output.scalar();
      bumped(j) = base(j) - h;
      tape.set_value(p, bumped);
      tape.replay();
      const double f_minus = output.scalar();
      tape.set_value(p, base);
      tape.replay();

      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double exact = analytic[pi](j);
      if (std::isnan(numeric) || std::isnan(exact)) {
        throw std::runtime_error("finite_diff_check: NaN gradient at coordinate " +
                                 std::to_string(flat));
      }
      const double rel = std::abs(exact - numeric) / std::max(1.0, std::abs(numeric));
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_coord = flat;
      }
    }
  }
  return result;
}

}  // namespace ratiolab
