#include "ratiolab/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>

#include "ratiolab/bench.hpp"
#include "ratiolab/eval.hpp"
#include "ratiolab/nets.hpp"
#include "ratiolab/prob.hpp"
#include "ratiolab/trainer.hpp"

namespace ratiolab {

namespace fs = std::filesystem;

namespace {

std::ofstream open_artifact(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::optional<DistSpec> spec_of(const std::string& source_text) {
  const std::string prefix = "spec:";
  if (source_text.rfind(prefix, 0) != 0) return std::nullopt;
  return parse_dist_spec(source_text.substr(prefix.size()));
}

void write_summary(const fs::path& path, const RunConfig& cfg, const TrainReport& report,
                   const std::vector<std::string>& extra) {
  std::ofstream out = open_artifact(path);
  out << "# resolved configuration\n" << serialize_config(cfg) << "\n# outcome\n";
  if (!report.records.empty()) {
    const TrainRecord& last = report.records.back();
    out << "final_iter = " << last.iter << "\n"
        << "final_ratio_loss = " << num(last.ratio_loss) << "\n"
        << "final_gen_loss = " << num(last.gen_loss) << "\n"
        << "final_mmd2_heldout = " << num(last.mmd2_heldout) << "\n"
        << "clamp_events = " << last.clamp_events << "\n";
  }
  out << "eval_sigma = " << num(report.eval_sigma)
      << (report.eval_sigma_floored ? "  # floored" : "") << "\n"
      << "total_seconds = " << num(report.total_seconds) << "\n"
      << "aborted = " << (report.aborted ? "true" : "false") << "\n";
  for (const std::string& line : extra) out << line << "\n";
}

struct TrainArtifacts {
  TrainReport report;
  std::optional<DistSpec> data_spec, gen_spec;
};

TrainArtifacts execute_run(const RunConfig& cfg, bool allow_generator, RatioNet& ratio,
                           std::optional<GeneratorNet>& gen) {
  if (cfg.data_source.empty()) throw std::runtime_error("data.source is required");
  const DataSource data = make_data_source(cfg.data_source);

  TrainConfig tc = cfg.train;
  std::optional<DataSource> gen_src;
  if (cfg.gen_source == "data") {
    tc.mirror_data = true;
  } else if (!cfg.gen_source.empty()) {
    gen_src.emplace(make_data_source(cfg.gen_source));
    if (gen_src->dim() != data.dim()) {
      throw std::runtime_error("data.gen_source dimension " + std::to_string(gen_src->dim()) +
                               " does not match data.source dimension " +
                               std::to_string(data.dim()));
    }
  } else if (!allow_generator) {
    throw std::runtime_error("estimate-ratio requires data.gen_source (a sample source or 'data')");
  }

  const Activation act = activation_by_name(cfg.activation);
  ratio = RatioNet(static_cast<int>(data.dim()), cfg.ratio_hidden, resolve_head(cfg), act);
  RngState ratio_init = RngState(cfg.train.seed).split(9);
  ratio.net().init_glorot(ratio_init);

  const bool train_generator = allow_generator && !gen_src.has_value() && !tc.mirror_data;
  if (train_generator) {
    gen.emplace(cfg.latent_dim, cfg.gen_hidden, static_cast<int>(data.dim()), act);
    RngState gen_init = RngState(cfg.train.seed).split(10);
    gen->net().init_glorot(gen_init);
  }

  TrainArtifacts result;
  result.data_spec = spec_of(cfg.data_source);
  if (!cfg.gen_source.empty() && cfg.gen_source != "data") {
    result.gen_spec = spec_of(cfg.gen_source);
  }
  result.report = train(tc, data, train_generator ? &*gen : nullptr, ratio,
                        gen_src ? &*gen_src : nullptr);

  const fs::path out_dir = cfg.out_dir;
  fs::create_directories(out_dir);
  {
    std::ofstream out = open_artifact(out_dir / "report.csv");
    write_report_csv(out, result.report);
  }
  if (cfg.write_checkpoint) {
    save_checkpoint((out_dir / "ratio.ckpt").string(), ratio.net().params());
    if (train_generator) save_checkpoint((out_dir / "gen.ckpt").string(), gen->net().params());
  }
  return result;
}

void require_not_aborted(const TrainReport& report) {
  if (!report.aborted) return;
  throw std::runtime_error("training aborted at iteration " + std::to_string(report.abort_iter) +
                           ": " + report.abort_loss + " is not finite (clamp events " +
                           std::to_string(report.abort_clamps) + ")");
}

}  // namespace

int run_train(const RunConfig& cfg) {
  RatioNet ratio(1, {}, Head::probability);  // replaced inside execute_run
  std::optional<GeneratorNet> gen;
  const TrainArtifacts art = execute_run(cfg, /*allow_generator=*/true, ratio, gen);
  write_summary(fs::path(cfg.out_dir) / "summary.txt", cfg, art.report, {});
  std::cout << "wrote " << (fs::path(cfg.out_dir) / "report.csv").string() << "\n";
  require_not_aborted(art.report);
  if (!art.report.records.empty()) {
    const TrainRecord& last = art.report.records.back();
    std::cout << "final iter " << last.iter << ": ratio_loss=" << num(last.ratio_loss)
              << " gen_loss=" << num(last.gen_loss)
              << " mmd2_heldout=" << num(last.mmd2_heldout) << "\n";
  }
  return 0;
}

int run_estimate_ratio(const RunConfig& cfg) {
  RatioNet ratio(1, {}, Head::probability);  // replaced inside execute_run
  std::optional<GeneratorNet> gen;
  const TrainArtifacts art = execute_run(cfg, /*allow_generator=*/false, ratio, gen);

  std::vector<std::string> extra;
  const bool one_dim = ratio.net().in_dim() == 1;
  if (one_dim) {
    const GridSpec grid = parse_grid(cfg.recovery_grid);
    const Eigen::MatrixXd xs = uniform_grid_1d(grid.lo, grid.hi, grid.n);
    const Eigen::VectorXd estimate = ratio.log_ratio(xs);

    const bool have_analytic = art.data_spec.has_value() && art.gen_spec.has_value();
    std::ofstream out = open_artifact(fs::path(cfg.out_dir) / "ratio_grid.csv");
    out << (have_analytic ? "x,log_ratio,analytic_log_ratio\n" : "x,log_ratio\n");
    double abs_sum = 0.0;
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
      out << num(xs(i, 0)) << ',' << num(estimate[i]);
      if (have_analytic) {
        const double truth =
            analytic_log_ratio(*art.data_spec, *art.gen_spec, xs.row(i).transpose());
        out << ',' << num(truth);
        abs_sum += std::abs(estimate[i] - truth);
      }
      out << '\n';
    }
    if (have_analytic) {
      extra.push_back("grid_log_ratio_mae = " + num(abs_sum / static_cast<double>(xs.rows())));
    }
  }
  write_summary(fs::path(cfg.out_dir) / "summary.txt", cfg, art.report, extra);
  std::cout << "wrote " << (fs::path(cfg.out_dir) / "report.csv").string() << "\n";
  if (one_dim) std::cout << "wrote " << (fs::path(cfg.out_dir) / "ratio_grid.csv").string() << "\n";
  require_not_aborted(art.report);
  for (const std::string& line : extra) std::cout << line << "\n";
  return 0;
}

int run_curves(const RunConfig& cfg) {
  const CurveTable table = emit_f_curves(all_fdivs(), default_log_r_grid());
  const fs::path out_dir = cfg.out_dir;
  fs::create_directories(out_dir);
  {
    std::ofstream out = open_artifact(out_dir / "curves.csv");
    write_curves_csv(out, table);
  }
  {
    std::ofstream out = open_artifact(out_dir / "curves.svg");
    write_curves_svg(out, table);
  }
  std::cout << "wrote " << (out_dir / "curves.csv").string() << " and "
            << (out_dir / "curves.svg").string() << "\n";
  return 0;
}

int run_gradcheck(const RunConfig& cfg) {
  (void)cfg;
  const BenchResult res = run_acceptance_case(0);
  std::cout << format_acceptance_line(res) << "\n";
  return res.passed ? 0 : 1;
}

int run_benchmark(const RunConfig& cfg, const std::string& cli_path) {
  BenchOptions opts;
  opts.cli_path = cli_path;
  opts.scratch_dir = (fs::path(cfg.out_dir) / "bench_scratch").string();
  fs::create_directories(cfg.out_dir);

  int passed = 0;
  for (int i = 0; i < acceptance_count(); ++i) {
    const BenchResult res = run_acceptance_case(i, opts);
    std::cout << format_acceptance_line(res) << std::endl;
    if (res.passed) ++passed;
  }
  std::cout << passed << "/" << acceptance_count() << " checks passed\n";
  return passed == acceptance_count() ? 0 : 1;
}

int run_command(const std::string& command, const RunConfig& cfg, const std::string& cli_path) {
  if (command == "train") return run_train(cfg);
  if (command == "estimate-ratio") return run_estimate_ratio(cfg);
  if (command == "curves") return run_curves(cfg);
  if (command == "gradcheck") return run_gradcheck(cfg);
  if (command == "benchmark") return run_benchmark(cfg, cli_path);
  throw std::runtime_error("unknown command '" + command +
                           "' (expected train, estimate-ratio, curves, gradcheck, benchmark)");
}

}  // namespace ratiolab
