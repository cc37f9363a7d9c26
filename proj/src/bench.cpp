#include "ratiolab/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "ratiolab/config.hpp"
#include "ratiolab/eval.hpp"
#include "ratiolab/finite_diff.hpp"
#include "ratiolab/moment_matching.hpp"
#include "ratiolab/nets.hpp"
#include "ratiolab/prob.hpp"
#include "ratiolab/ratio_matching.hpp"
#include "ratiolab/trainer.hpp"

namespace ratiolab {

namespace {

using bench_constants::kGradSeeds;
using bench_constants::kGradTol;

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

// ---------------------------------------------------------------- case 1

// Worst finite-difference relative error across every differentiable loss
// expression, randomised inputs.
double gradcheck_sweep(int seeds, std::string* worst_name) {
  double worst = 0.0;
  auto note = [&](const std::string& name, const GradCheckResult& res) {
    if (res.max_rel_error > worst) {
      worst = res.max_rel_error;
      if (worst_name != nullptr) *worst_name = name;
    }
  };

  for (int s = 0; s < seeds; ++s) {
    RngState rng(1000 + static_cast<std::uint64_t>(s));
    const Eigen::Index n = 6;

    auto unit_interval = [&rng](Eigen::Index rows) {
      Eigen::MatrixXd m(rows, 1);
      for (Eigen::Index i = 0; i < rows; ++i) m(i, 0) = 0.08 + 0.84 * rng.next_unit();
      return m;
    };
    auto log_uniform = [&rng](Eigen::Index rows) {
      Eigen::MatrixXd m(rows, 1);
      for (Eigen::Index i = 0; i < rows; ++i) {
        m(i, 0) = std::exp(std::log(0.2) + (std::log(5.0) - std::log(0.2)) * rng.next_unit());
      }
      return m;
    };
    auto gaussian_batch = [&rng](Eigen::Index rows, Eigen::Index cols) {
      Eigen::MatrixXd m(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.next_normal();
      }
      return m;
    };

    const ClassBalance bal(0.37);

    // scoring-rule ratio losses over D
    for (const ScoringRule& rule : scoring_rules()) {
      if (!rule.differentiable) continue;
      ad::Tape tape;
      ad::Var dr = tape.leaf(unit_interval(n));
      ad::Var dg = tape.leaf(unit_interval(n));
      ad::Var loss = ratio_loss_cpe(rule, dr, dg, bal);
      const ad::Var params[] = {dr, dg};
      note("cpe:" + rule.name, finite_diff_check(tape, loss, params));
    }

    // generator losses over D
    for (GenVariant variant : {GenVariant::minimax, GenVariant::nonsaturating, GenVariant::log_ratio}) {
      ad::Tape tape;
      ad::Var dg = tape.leaf(unit_interval(n));
      ad::Var loss = generator_loss_cpe(variant, dg);
      const ad::Var params[] = {dg};
      note("gen_cpe", finite_diff_check(tape, loss, params));
    }

    // f-divergence ratio + generator losses over r
    for (FDiv kind : all_fdivs()) {
      {
        ad::Tape tape;
        ad::Var rr = tape.leaf(log_uniform(n));
        ad::Var rg = tape.leaf(log_uniform(n));
        ad::Var loss = fdiv_ratio_loss(kind, rr, rg);
        const ad::Var params[] = {rr, rg};
        note("fdiv_ratio:" + fdiv_name(kind), finite_diff_check(tape, loss, params));
      }
      {
        ad::Tape tape;
        ad::Var rg = tape.leaf(log_uniform(n));
        ad::Var loss = fdiv_generator_loss(kind, rg);
        const ad::Var params[] = {rg};
        note("fdiv_gen:" + fdiv_name(kind), finite_diff_check(tape, loss, params));
      }
      {
        ad::Tape tape;
        ad::Var rr = tape.leaf(log_uniform(n));
        ad::Var rg = tape.leaf(log_uniform(n));
        ad::Var loss = bregman_ratio_loss(kind, rr, rg);
        const ad::Var params[] = {rr, rg};
        note("bregman_ratio:" + fdiv_name(kind), finite_diff_check(tape, loss, params));
      }
      {
        ad::Tape tape;
        ad::Var rg = tape.leaf(log_uniform(n));
        ad::Var loss = bregman_generator_loss(kind, rg);
        const ad::Var params[] = {rg};
        note("bregman_gen:" + fdiv_name(kind), finite_diff_check(tape, loss, params));
      }
    }

    // direct ratio-matching losses
    {
      ad::Tape tape;
      ad::Var rr = tape.leaf(log_uniform(n));
      ad::Var rg = tape.leaf(log_uniform(n));
      ad::Var loss = lsif_loss(rr, rg);
      const ad::Var params[] = {rr, rg};
      note("lsif", finite_diff_check(tape, loss, params));
    }
    {
      ad::Tape tape;
      ad::Var rr = tape.leaf(log_uniform(n));
      ad::Var rg = tape.leaf(log_uniform(n));
      ad::Var loss = kliep_loss(rr, rg);
      const ad::Var params[] = {rr, rg};
      note("kliep", finite_diff_check(tape, loss, params));
    }

    // moment and kernel objectives over the sample batches themselves
    {
      ad::Tape tape;
      ad::Var xp = tape.leaf(gaussian_batch(5, 2));
      ad::Var xg = tape.leaf(gaussian_batch(5, 2));
      ad::Var loss = moment_loss(TestStatistic::raw(3), xp, xg);
      const ad::Var params[] = {xp, xg};
      note("moment:3", finite_diff_check(tape, loss, params));
    }
    {
      ad::Tape tape;
      ad::Var x = tape.leaf(gaussian_batch(5, 2));
      ad::Var y = tape.leaf(gaussian_batch(5, 2));
      ad::Var loss = mmd2_biased(KernelSpec::rbf(1.2), x, y);
      const ad::Var params[] = {x, y};
      note("mmd_rbf", finite_diff_check(tape, loss, params));
    }
    {
      ad::Tape tape;
      ad::Var x = tape.leaf(gaussian_batch(5, 2));
      ad::Var y = tape.leaf(gaussian_batch(5, 2));
      ad::Var loss = mmd2_biased(KernelSpec::polynomial(3, 1.0), x, y);
      const ad::Var params[] = {x, y};
      note("mmd_poly", finite_diff_check(tape, loss, params));
    }
  }
  return worst;
}

BenchResult case_gradients() {
  BenchResult res;
  res.name = "gradient-check";
  res.limit_seconds = 60.0;
  std::string worst_name = "none";
  const double worst = gradcheck_sweep(kGradSeeds, &worst_name);
  res.passed = worst < kGradTol;
  res.detail = fmt("max_rel_err=%.3g (tol %.0e) at ", worst, kGradTol) + worst_name;
  return res;
}

// ---------------------------------------------------------------- case 2

BenchResult case_conjugate_identity() {
  BenchResult res;
  res.name = "conjugate-identity";
  res.limit_seconds = 1.0;
  const Eigen::ArrayXd r =
      Eigen::ArrayXd::LinSpaced(1000, std::log(1e-3), std::log(1e3)).exp();
  double worst = 0.0;
  for (FDiv kind : all_fdivs()) {
    const Eigen::ArrayXd lhs = f_conj(kind, f_prime(kind, r));
    const Eigen::ArrayXd rhs = r * f_prime(kind, r) - f_value(kind, r);
    worst = std::max(worst, (lhs - rhs).abs().maxCoeff());
  }
  res.passed = worst < bench_constants::kConjugateTol;
  res.detail = fmt("max_abs_err=%.3g (tol %.0e), 5 specs x 1000 ratios", worst,
                   bench_constants::kConjugateTol);
  return res;
}

// ---------------------------------------------------------------- case 3

Eigen::ArrayXd random_ratios(RngState& rng, Eigen::Index n, double lo, double hi) {
  Eigen::ArrayXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.next_unit());
  }
  return r;
}

BenchResult case_bregman_agreement() {
  BenchResult res;
  res.name = "bregman-fdiv-agreement";
  res.limit_seconds = 5.0;
  RngState rng(7);
  double worst = 0.0;
  for (int b = 0; b < 1000; ++b) {
    const Eigen::ArrayXd rr = random_ratios(rng, 32, 0.1, 10.0);
    const Eigen::ArrayXd rg = random_ratios(rng, 32, 0.1, 10.0);
    for (FDiv kind : all_fdivs()) {
      const double diff =
          std::abs(bregman_ratio_loss(kind, rr, rg) - fdiv_ratio_loss(kind, rr, rg));
      worst = std::max(worst, diff);
    }
  }
  res.passed = worst < bench_constants::kBregmanAgreementTol;
  res.detail = fmt("max_abs_diff=%.3g (tol %.0e), 1000 batches x 5 specs", worst,
                   bench_constants::kBregmanAgreementTol);
  return res;
}

// ---------------------------------------------------------------- case 4

BenchResult case_lsif_offset() {
  BenchResult res;
  res.name = "lsif-bregman-offset";
  res.limit_seconds = 5.0;
  RngState rng(11);
  double worst = 0.0;
  for (int b = 0; b < 200; ++b) {
    const Eigen::ArrayXd rr = random_ratios(rng, 24, 0.1, 10.0);
    const Eigen::ArrayXd rg = random_ratios(rng, 24, 0.1, 10.0);
    const double diff = bregman_ratio_loss(FDiv::squared, rr, rg) - lsif_loss(rr, rg);
    worst = std::max(worst, std::abs(diff - 0.5));
  }
  res.passed = worst < bench_constants::kExactPairTol;
  res.detail = fmt("max |offset-0.5|=%.3g (tol %.0e)", worst, bench_constants::kExactPairTol);
  return res;
}

// ---------------------------------------------------------------- case 5

BenchResult case_gan_bernoulli() {
  BenchResult res;
  res.name = "gan-bernoulli-equivalence";
  res.limit_seconds = 5.0;
  RngState rng(13);
  const ClassBalance half(0.5);
  const ScoringRule& bern = scoring_rule_by_name("bernoulli");
  double worst = 0.0;
  for (int b = 0; b < 200; ++b) {
    const Eigen::ArrayXd rr = random_ratios(rng, 24, 0.1, 10.0);
    const Eigen::ArrayXd rg = random_ratios(rng, 24, 0.1, 10.0);
    const double lhs = fdiv_ratio_loss(FDiv::gan, rr, rg);
    const double rhs = 2.0 * ratio_loss_cpe(bern, ratio_to_disc(rr), ratio_to_disc(rg), half);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  res.passed = worst < bench_constants::kExactPairTol;
  res.detail = fmt("max_abs_diff=%.3g (tol %.0e)", worst, bench_constants::kExactPairTol);
  return res;
}

// ------------------------------------------------------------- cases 6, 7

struct RecoveryRun {
  RatioNet ratio;
  DistSpec p, q;
  TrainReport report;
};

// Classifier-based ratio fit on the standard-vs-shifted Gaussian pair using
// fixed empirical samples per class.
RecoveryRun train_recovery_net() {
  const DistSpec p = GaussianSpec::scalar(0.0, 1.0);
  const DistSpec q = GaussianSpec::scalar(1.0, 1.0);

  RngState data_rng(101), gen_rng(202), init_rng(303);
  const Eigen::MatrixXd xp =
      sample(p, bench_constants::kRecoverySamplesPerClass, data_rng, SampleSource::real).points;
  const Eigen::MatrixXd xq =
      sample(q, bench_constants::kRecoverySamplesPerClass, gen_rng, SampleSource::generated).points;

  RecoveryRun run{RatioNet(1, {32, 32}, Head::probability), p, q, {}};
  run.ratio.net().init_glorot(init_rng);

  TrainConfig cfg;
  cfg.ratio_loss = "bernoulli";
  cfg.gen_loss = "nonsaturating";  // unused: generator side is a fixed source
  cfg.iterations = bench_constants::kRecoverySteps;
  cfg.batch_size = bench_constants::kRecoveryBatch;
  cfg.opt = OptimizerSpec::adam(bench_constants::kRecoveryLr);
  cfg.seed = 404;
  cfg.log_every = 500;
  cfg.eval_batch = 256;

  const DataSource data(xp), gen_src(xq);
  run.report = train(cfg, data, nullptr, run.ratio, &gen_src);
  return run;
}

BenchResult case_ratio_recovery() {
  BenchResult res;
  res.name = "ratio-recovery";
  res.limit_seconds = 60.0;
  RecoveryRun run = train_recovery_net();
  if (run.report.aborted) {
    res.detail = "training aborted at iter " + std::to_string(run.report.abort_iter);
    return res;
  }
  const Eigen::MatrixXd grid = uniform_grid_1d(-2.0, 3.0, 101);
  const double mae = ratio_recovery_error(run.ratio, run.p, run.q, grid);
  res.passed = mae < bench_constants::kRecoveryMaeMax;
  res.detail = fmt("log-ratio MAE=%.4f on [-2,3] (max %.2f), ", mae,
                   bench_constants::kRecoveryMaeMax) +
               std::to_string(bench_constants::kRecoverySteps) + " ratio steps";
  return res;
}

BenchResult case_divergence_bound() {
  BenchResult res;
  res.name = "divergence-bound";
  res.limit_seconds = 30.0;
  RecoveryRun run = train_recovery_net();
  if (run.report.aborted) {
    res.detail = "training aborted at iter " + std::to_string(run.report.abort_iter);
    return res;
  }
  RngState rng(515);
  const DivergenceGap gap =
      divergence_gap(FDiv::kl, run.ratio, run.p, run.q, bench_constants::kBoundSamples, rng);
  const double rel = std::abs(gap.bound - gap.analytic) / gap.analytic;
  res.passed = rel < bench_constants::kBoundRelErrMax;
  res.detail = fmt("bound=%.4f vs analytic %.4f (rel err %.3f)", gap.bound, gap.analytic, rel);
  return res;
}

// ---------------------------------------------------------------- case 8

BenchResult case_flatness() {
  BenchResult res;
  res.name = "curve-flatness-ordering";
  res.limit_seconds = 5.0;
  const CurveTable table = emit_f_curves(all_fdivs(), default_log_r_grid());

  Eigen::Index at = -1;
  for (Eigen::Index i = 0; i < table.log_r.size(); ++i) {
    if (std::abs(table.log_r[i] + 3.0) < 1e-9) at = i;
  }
  if (at < 0) {
    res.detail = "grid does not contain log r = -3";
    return res;
  }
  auto col = [&table](const std::string& name) {
    for (std::size_t c = 0; c < table.curves.size(); ++c) {
      if (table.curves[c] == name) return static_cast<Eigen::Index>(c);
    }
    throw std::logic_error("curve missing: " + name);
  };

  const double s_kl = table.slope(at, col("kl"));
  const double s_rkl = table.slope(at, col("reverse_kl"));
  const double s_alt = table.slope(at, col("nonsaturating"));

  // independently hand-evaluated derivatives at log r = -3
  const double r = std::exp(-3.0);
  const double want_kl = r * (1.0 + std::log(r));
  const double want_rkl = -1.0;
  const double want_alt = -1.0 / (r + 1.0);

  const double table_err = std::max({std::abs(s_kl - want_kl), std::abs(s_rkl - want_rkl),
                                     std::abs(s_alt - want_alt)});
  const bool ordering = std::abs(s_kl) < std::abs(s_alt) && std::abs(s_kl) < std::abs(s_rkl);
  res.passed = ordering && table_err < 1e-6;
  res.detail = fmt("|slope| kl=%.4f < alt=%.4f, rkl=%.4f; ", std::abs(s_kl), std::abs(s_alt),
                   std::abs(s_rkl)) +
               fmt("table err %.1e", table_err);
  return res;
}

// ---------------------------------------------------------------- case 9

BenchResult case_ring_training() {
  BenchResult res;
  res.name = "ring-training";
  res.limit_seconds = 600.0;
  using namespace bench_constants;

  const MixtureSpec ring = MixtureSpec::ring(kRingModes, kRingRadius, kRingSigma);
  const DataSource data{DistSpec(ring)};

  RngState init_rng(909);
  GeneratorNet gen(2, {32, 32}, 2);
  RatioNet ratio(2, {32, 32}, Head::probability);
  gen.net().init_glorot(init_rng);
  ratio.net().init_glorot(init_rng);

  TrainConfig cfg;
  cfg.ratio_loss = "bernoulli";
  cfg.gen_loss = "nonsaturating";
  cfg.iterations = kRingIterations;
  cfg.batch_size = kRingBatch;
  cfg.opt = OptimizerSpec::adam(kRingLr, kRingBeta1);
  cfg.instance_noise_std = kRingInstanceNoise;
  cfg.seed = 808;
  cfg.log_every = 500;
  cfg.eval_batch = 512;

  GeneratorNet* gen_ptr = &gen;
  TrainReport report = train(cfg, data, gen_ptr, ratio);
  if (report.aborted) {
    res.detail = "training aborted at iter " + std::to_string(report.abort_iter) + " (" +
                 report.abort_loss + ")";
    return res;
  }

  RngState eval_rng(606);
  const Eigen::MatrixXd held = sample(DistSpec(ring), kRingEvalSamples, eval_rng).points;
  const SampleBatch z = gen.sample_latent(kRingEvalSamples, eval_rng);
  const Eigen::MatrixXd fake = generate(gen, z).points;

  const double sigma = median_heuristic(held, fake);
  const double mmd = mmd2_unbiased(KernelSpec::rbf(sigma), held, fake);
  const ModeCoverage cov = mode_coverage(fake, ring, kRingCoverRadius, kRingCoverFraction);

  res.passed = mmd < kRingMmdMax && cov.covered >= kRingCoverageMin;
  res.detail = fmt("mmd2_unbiased=%.4f (max %.2f), ", mmd, kRingMmdMax) +
               "coverage=" + std::to_string(cov.covered) + "/" + std::to_string(kRingModes) +
               " (min " + std::to_string(kRingCoverageMin) + ")";
  return res;
}

// --------------------------------------------------------------- case 10

BenchResult case_mirror_fixed_point() {
  BenchResult res;
  res.name = "mirror-fixed-point";
  res.limit_seconds = 120.0;
  using namespace bench_constants;

  const DataSource data{DistSpec(GaussianSpec::standard(1))};
  RngState init_rng(111);
  RatioNet ratio(1, {32, 32}, Head::probability);
  ratio.net().init_glorot(init_rng);

  TrainConfig cfg;
  cfg.ratio_loss = "bernoulli";
  cfg.gen_loss = "nonsaturating";
  cfg.iterations = kMirrorIterations;
  cfg.batch_size = 512;
  cfg.opt = OptimizerSpec::adam(1e-3);
  cfg.seed = 121;
  cfg.log_every = 1;
  cfg.eval_batch = 128;
  cfg.mirror_data = true;

  const TrainReport report = train(cfg, data, nullptr, ratio);
  if (report.aborted) {
    res.detail = "training aborted at iter " + std::to_string(report.abort_iter);
    return res;
  }

  const double log2 = std::log(2.0);
  double worst_loss = 0.0, worst_d = 0.0;
  for (const TrainRecord& rec : report.records) {
    worst_loss = std::max(worst_loss, std::abs(rec.ratio_loss - log2));
    worst_d = std::max({worst_d, std::abs(rec.mean_stat_real - 0.5),
                        std::abs(rec.mean_stat_gen - 0.5)});
  }
  res.passed = worst_loss <= kMirrorLossBand && worst_d <= kMirrorDiscBand;
  res.detail = fmt("max |loss-log2|=%.4f (band %.2f), max |D-0.5|=%.4f", worst_loss,
                   kMirrorLossBand, worst_d);
  return res;
}

// --------------------------------------------------------------- case 11

std::string run_train_to_csv(std::uint64_t seed) {
  const DataSource data{DistSpec(GaussianSpec::standard(1))};
  RngState init_rng(321);
  GeneratorNet gen(1, {8}, 1);
  RatioNet ratio(1, {8}, Head::probability);
  gen.net().init_glorot(init_rng);
  ratio.net().init_glorot(init_rng);

  TrainConfig cfg;
  cfg.iterations = 40;
  cfg.batch_size = 64;
  cfg.opt = OptimizerSpec::adam(1e-3);
  cfg.seed = seed;
  cfg.log_every = 5;
  cfg.eval_batch = 64;

  const TrainReport report = train(cfg, data, &gen, ratio);
  std::ostringstream out;
  write_report_csv(out, report);
  return out.str();
}

bool same_file_bytes(const std::filesystem::path& a, const std::filesystem::path& b,
                     std::string* err) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) {
    *err = "missing artifact " + (fa ? b.string() : a.string());
    return false;
  }
  std::ostringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  if (sa.str() != sb.str()) {
    *err = "artifacts differ: " + a.string() + " vs " + b.string();
    return false;
  }
  return true;
}

BenchResult case_determinism(const BenchOptions& opts) {
  BenchResult res;
  res.name = "determinism";
  res.limit_seconds = 120.0;

  if (opts.cli_path.empty()) {
    const std::string a = run_train_to_csv(777);
    const std::string b = run_train_to_csv(777);
    std::ostringstream ca, cb;
    write_curves_csv(ca, emit_f_curves(all_fdivs(), default_log_r_grid()));
    write_curves_csv(cb, emit_f_curves(all_fdivs(), default_log_r_grid()));
    res.passed = a == b && ca.str() == cb.str();
    res.detail = res.passed ? "in-process double run: report + curves byte-identical"
                            : "in-process double run: outputs differ";
    return res;
  }

  namespace fs = std::filesystem;
  const fs::path scratch = opts.scratch_dir;
  fs::create_directories(scratch);
  const fs::path cfg_path = scratch / "determinism.cfg";
  {
    std::ofstream cfg(cfg_path);
    cfg << "data.source = spec:std:1\n"
           "model.latent_dim = 1\n"
           "model.gen_hidden = 8\n"
           "model.ratio_hidden = 8\n"
           "train.iterations = 40\n"
           "train.batch_size = 64\n"
           "train.seed = 777\n"
           "train.log_every = 5\n"
           "train.eval_batch = 64\n";
  }

  auto run_cmd = [&](const std::string& command, const fs::path& out_dir) {
    const std::string line = "\"" + opts.cli_path + "\" " + command + " --config \"" +
                             cfg_path.string() + "\" --out \"" + out_dir.string() +
                             "\" >/dev/null 2>&1";
    return std::system(line.c_str());
  };

  for (const char* cmd : {"train", "curves"}) {
    const fs::path out_a = scratch / (std::string(cmd) + "_a");
    const fs::path out_b = scratch / (std::string(cmd) + "_b");
    if (run_cmd(cmd, out_a) != 0 || run_cmd(cmd, out_b) != 0) {
      res.detail = std::string("command '") + cmd + "' failed";
      return res;
    }
    const char* artifact = std::string(cmd) == "train" ? "report.csv" : "curves.csv";
    std::string err;
    if (!same_file_bytes(out_a / artifact, out_b / artifact, &err)) {
      res.detail = err;
      return res;
    }
  }
  res.passed = true;
  res.detail = "train + curves artifacts byte-identical across reruns";
  return res;
}

// --------------------------------------------------------------- case 12

BenchResult case_mmd_sanity() {
  BenchResult res;
  res.name = "mmd-sanity";
  res.limit_seconds = 60.0;
  using namespace bench_constants;

  RngState rng(1414);
  const DistSpec spec = GaussianSpec::standard(2);
  const Eigen::MatrixXd x = sample(spec, 300, rng).points;
  const double self = mmd2_biased(KernelSpec::rbf(1.0), x, x);

  Eigen::ArrayXd values(kMmdResamples);
  for (int i = 0; i < kMmdResamples; ++i) {
    const Eigen::MatrixXd a = sample(spec, kMmdResampleN, rng).points;
    const Eigen::MatrixXd b = sample(spec, kMmdResampleN, rng).points;
    const double sigma = median_heuristic(a, b);
    values[i] = mmd2_unbiased(KernelSpec::rbf(sigma), a, b);
  }
  const double mean = values.mean();
  const double sd = std::sqrt((values - mean).square().sum() /
                              static_cast<double>(kMmdResamples - 1));
  const double se = sd / std::sqrt(static_cast<double>(kMmdResamples));

  res.passed = self == 0.0 && std::abs(mean) <= 3.0 * se;
  res.detail = fmt("biased self-MMD=%g; unbiased mean=%.2e within 3*SE=%.2e", self, mean,
                   3.0 * se);
  return res;
}

using CaseFn = std::function<BenchResult(const BenchOptions&)>;

const std::vector<CaseFn>& cases() {
  static const std::vector<CaseFn> table = {
      [](const BenchOptions&) { return case_gradients(); },
      [](const BenchOptions&) { return case_conjugate_identity(); },
      [](const BenchOptions&) { return case_bregman_agreement(); },
      [](const BenchOptions&) { return case_lsif_offset(); },
      [](const BenchOptions&) { return case_gan_bernoulli(); },
      [](const BenchOptions&) { return case_ratio_recovery(); },
      [](const BenchOptions&) { return case_divergence_bound(); },
      [](const BenchOptions&) { return case_flatness(); },
      [](const BenchOptions&) { return case_ring_training(); },
      [](const BenchOptions&) { return case_mirror_fixed_point(); },
      [](const BenchOptions& o) { return case_determinism(o); },
      [](const BenchOptions&) { return case_mmd_sanity(); },
  };
  return table;
}

}  // namespace

int acceptance_count() { return static_cast<int>(cases().size()); }

BenchResult run_acceptance_case(int index, const BenchOptions& opts) {
  if (index < 0 || index >= acceptance_count()) {
    throw std::out_of_range("run_acceptance_case: index out of range");
  }
  const auto t0 = std::chrono::steady_clock::now();
  BenchResult res;
  try {
    res = cases()[static_cast<std::size_t>(index)](opts);
  } catch (const std::exception& e) {
    res.name = "case-" + std::to_string(index + 1);
    res.passed = false;
    res.detail = std::string("exception: ") + e.what();
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (res.limit_seconds > 0.0 && res.seconds >= res.limit_seconds) {
    res.passed = false;
    res.detail += fmt(" [over %gs budget]", res.limit_seconds);
  }
  return res;
}

std::vector<BenchResult> run_acceptance(const BenchOptions& opts) {
  std::vector<BenchResult> results;
  for (int i = 0; i < acceptance_count(); ++i) {
    results.push_back(run_acceptance_case(i, opts));
  }
  return results;
}

std::string format_acceptance_line(const BenchResult& result) {
  char buf[64];
  std::snprintf(buf, sizeof buf, " [%.1fs]", result.seconds);
  return (result.passed ? "PASS " : "FAIL ") + result.name + ": " + result.detail + buf;
}

}  // namespace ratiolab
