#include "ratiolab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "ratiolab/quadrature.hpp"

namespace ratiolab {

Eigen::VectorXd default_log_r_grid() {
  return Eigen::VectorXd::LinSpaced(1001, -5.0, 5.0);
}

CurveTable emit_f_curves(const std::vector<FDiv>& specs, const Eigen::VectorXd& log_r) {
  if (log_r.size() < 2) throw std::invalid_argument("emit_f_curves: grid needs at least 2 points");
  for (Eigen::Index i = 0; i + 1 < log_r.size(); ++i) {
    if (!(log_r[i] < log_r[i + 1])) {
      throw std::invalid_argument("emit_f_curves: grid must be strictly increasing");
    }
  }
  if (!log_r.allFinite()) throw std::invalid_argument("emit_f_curves: grid must be finite");

  CurveTable table;
  table.log_r = log_r;
  const auto n = log_r.size();
  const auto cols = static_cast<Eigen::Index>(specs.size()) + 1;
  table.value.resize(n, cols);
  table.slope.resize(n, cols);

  const Eigen::ArrayXd r = log_r.array().exp();
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const FDiv kind = specs[c];
    table.curves.push_back(fdiv_name(kind));
    const double f1 = f_value(kind, 1.0);
    table.value.col(static_cast<Eigen::Index>(c)) = (f_value(kind, r) - f1).matrix();
    table.slope.col(static_cast<Eigen::Index>(c)) = (r * f_prime(kind, r)).matrix();
  }
  // Alternative generator objective -log(r/(r+1)), shifted by its value at
  // r=1 (log 2); computed as log1p(1/r) for stability at large r.
  table.curves.push_back("nonsaturating");
  const Eigen::Index alt = cols - 1;
  table.value.col(alt) =
      (r.unaryExpr([](double v) { return std::log1p(1.0 / v); }) - std::log(2.0)).matrix();
  table.slope.col(alt) = (-(r + 1.0).inverse()).matrix();

  if (!table.value.allFinite() || !table.slope.allFinite()) {
    throw std::runtime_error("emit_f_curves: non-finite curve values on grid");
  }
  return table;
}

void write_curves_csv(std::ostream& out, const CurveTable& table) {
  out << "curve,log_r,value,slope\n";
  char buf[96];
  for (std::size_t c = 0; c < table.curves.size(); ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    for (Eigen::Index i = 0; i < table.log_r.size(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g\n", table.log_r[i],
                    table.value(i, ci), table.slope(i, ci));
      out << table.curves[c] << buf;
    }
  }
}

namespace {

const char* curve_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return palette[i % (sizeof palette / sizeof palette[0])];
}

}  // namespace

void write_curves_svg(std::ostream& out, const CurveTable& table) {
  const double width = 760.0, height = 520.0, ml = 64.0, mr = 170.0, mt = 28.0, mb = 48.0;
  const double pw = width - ml - mr, ph = height - mt - mb;
  const double x0 = table.log_r.minCoeff(), x1 = table.log_r.maxCoeff();
  double y0 = table.value.minCoeff(), y1 = table.value.maxCoeff();
  const double pad = 0.05 * (y1 - y0 + 1e-12);
  y0 -= pad;
  y1 += pad;

  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return mt + (y1 - y) / (y1 - y0) * ph; };
  char buf[160];

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // axes with zero lines when in range
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#333\"/>\n",
                ml, mt + ph, ml + pw, mt + ph);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#333\"/>\n", ml,
                mt, ml, mt + ph);
  out << buf;
  if (y0 < 0.0 && y1 > 0.0) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#bbb\" "
                  "stroke-dasharray=\"4 3\"/>\n",
                  ml, py(0.0), ml + pw, py(0.0));
    out << buf;
  }
  if (x0 < 0.0 && x1 > 0.0) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#bbb\" "
                  "stroke-dasharray=\"4 3\"/>\n",
                  px(0.0), mt, px(0.0), mt + ph);
    out << buf;
  }

  // tick labels at the extremes and zero
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\">%g</text>\n",
                px(x0), mt + ph + 18.0, x0);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\">%g</text>\n",
                px(x1), mt + ph + 18.0, x1);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\">log r</text>\n",
                ml + pw / 2.0, height - 10.0);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"end\">%.3g</text>\n",
                ml - 6.0, py(y0) + 4.0, y0);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"end\">%.3g</text>\n",
                ml - 6.0, py(y1) + 4.0, y1);
  out << buf;

  for (std::size_t c = 0; c < table.curves.size(); ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    out << "<polyline fill=\"none\" stroke=\"" << curve_color(c)
        << "\" stroke-width=\"1.6\" points=\"";
    for (Eigen::Index i = 0; i < table.log_r.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(table.log_r[i]), py(table.value(i, ci)));
      out << buf;
    }
    out << "\"/>\n";
    const double ly = mt + 16.0 + 18.0 * static_cast<double>(c);
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.2f\" y=\"%.2f\" width=\"12\" height=\"12\" fill=\"%s\"/>\n",
                  ml + pw + 14.0, ly - 10.0, curve_color(c));
    out << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\">%s</text>\n",
                  ml + pw + 32.0, ly, table.curves[c].c_str());
    out << buf;
  }
  out << "</svg>\n";
}

Eigen::MatrixXd uniform_grid_1d(double lo, double hi, Eigen::Index n) {
  if (n < 2 || !(lo < hi)) throw std::invalid_argument("uniform_grid_1d: bad range");
  Eigen::MatrixXd grid(n, 1);
  grid.col(0) = Eigen::VectorXd::LinSpaced(n, lo, hi);
  return grid;
}

double ratio_recovery_error(const RatioNet& ratio, const DistSpec& p, const DistSpec& q,
                            const Eigen::MatrixXd& grid) {
  if (grid.rows() == 0) throw std::invalid_argument("ratio_recovery_error: empty grid");
  if (grid.cols() != spec_dim(p)) {
    throw std::invalid_argument("ratio_recovery_error: grid dimension mismatch");
  }
  const Eigen::VectorXd model = ratio.log_ratio(grid);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < grid.rows(); ++i) {
    acc += std::abs(model[i] - analytic_log_ratio(p, q, grid.row(i).transpose()));
  }
  return acc / static_cast<double>(grid.rows());
}

DivergenceGap divergence_gap(FDiv kind, const RatioNet& ratio, const DistSpec& p,
                             const DistSpec& q, Eigen::Index n, RngState& rng) {
  if (n < 2) throw std::invalid_argument("divergence_gap: n must be >= 2");

  double analytic = 0.0;
  if (kind == FDiv::kl) {
    const bool both_gaussian = std::holds_alternative<GaussianSpec>(p) &&
                               std::holds_alternative<GaussianSpec>(q);
    analytic = both_gaussian ? analytic_kl(p, q) : quadrature_kl(p, q);
  } else if (kind == FDiv::pearson_chi2) {
    analytic = quadrature_fdiv(p, q, [](double u) { return (u - 1.0) * (u - 1.0); });
  } else {
    throw std::invalid_argument("divergence_gap: no analytic oracle for " + fdiv_name(kind));
  }

  const Eigen::MatrixXd xp = sample(p, n, rng, SampleSource::real).points;
  const Eigen::MatrixXd xq = sample(q, n, rng, SampleSource::generated).points;
  const Eigen::ArrayXd rp = ratio.log_ratio(xp).array().exp();
  const Eigen::ArrayXd rq = ratio.log_ratio(xq).array().exp();
  const Eigen::ArrayXd tp = f_prime(kind, rp);
  const Eigen::ArrayXd cq = f_conj(kind, f_prime(kind, rq));

  DivergenceGap out;
  out.analytic = analytic;
  out.bound = tp.mean() - cq.mean();
  const double nd = static_cast<double>(n);
  const double var_p = (tp - tp.mean()).square().sum() / (nd - 1.0);
  const double var_q = (cq - cq.mean()).square().sum() / (nd - 1.0);
  out.std_error = std::sqrt(var_p / nd + var_q / nd);
  out.gap = analytic - out.bound;
  return out;
}

ModeCoverage mode_coverage(const Eigen::MatrixXd& generated, const MixtureSpec& mix,
                           double radius, double cover_fraction) {
  if (generated.rows() == 0) throw std::invalid_argument("mode_coverage: empty batch");
  if (!(radius > 0.0)) throw std::invalid_argument("mode_coverage: radius must be positive");
  if (generated.cols() != mix.dim()) {
    throw std::invalid_argument("mode_coverage: dimension mismatch");
  }

  const std::size_t k = mix.components.size();
  ModeCoverage out;
  out.histogram.assign(k, 0);
  std::vector<long> within(k, 0);

  for (Eigen::Index i = 0; i < generated.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_c = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double dist = (generated.row(i).transpose() - mix.components[c].gaussian.mean).norm();
      if (dist < best) {
        best = dist;
        best_c = c;
      }
      if (dist <= radius) within[c] += 1;
    }
    out.histogram[best_c] += 1;
  }

  const double nd = static_cast<double>(generated.rows());
  out.within_fraction.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    out.within_fraction[c] = static_cast<double>(within[c]) / nd;
    if (out.within_fraction[c] >= cover_fraction) out.covered += 1;
  }
  return out;
}

}  // namespace ratiolab
