// Alternating bi-level training loop: k ratio-model descent steps followed by
// one generator descent step, with any registered ratio objective paired
// against any registered generator objective. Ratio steps never touch
// generator parameters and vice versa; runs are deterministic given the seed.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ratiolab/f_divergences.hpp"
#include "ratiolab/moment_matching.hpp"
#include "ratiolab/nets.hpp"
#include "ratiolab/prob.hpp"
#include "ratiolab/scoring_rules.hpp"

namespace ratiolab {

// -------------------------------------------------------------------------
// Loss registry. Ratio objectives fit r(x) (or D(x)); generator objectives
// move the generator given the current ratio model. Heads convert: a
// probability head derives r = D/(1-D), a positive head derives D = r/(r+1),
// so every pair below composes.
// -------------------------------------------------------------------------

enum class RatioLossKind { cpe, fdiv, lsif, kliep, bregman };

struct RatioLossSpec {
  RatioLossKind kind;
  std::string name;
  Rule rule = Rule::bernoulli;  // cpe
  FDiv fdiv = FDiv::kl;         // fdiv / bregman
};

// Accepted: the six scoring-rule names, "fdiv:<spec>", "lsif", "kliep",
// "bregman:<spec>". The misclassification rule is rejected (no usable
// gradient).
RatioLossSpec parse_ratio_loss(const std::string& name);

enum class GenLossKind { cpe, fdiv, bregman, moment, mmd };

struct GenLossSpec {
  GenLossKind kind;
  std::string name;
  GenVariant variant = GenVariant::nonsaturating;  // cpe
  FDiv fdiv = FDiv::kl;                            // fdiv / bregman
  int moment_order = 1;                            // moment
};

// Accepted: "minimax", "nonsaturating", "log_ratio", "fdiv:<spec>",
// "bregman:<spec>", "moment:<order>", "mmd". "kliep" is rejected: its
// model-dependent term mean(r_gen - 1) is linear in r and unbounded below,
// so it cannot serve as a generator objective.
GenLossSpec parse_gen_loss(const std::string& name);

// Every accepted canonical name (for registry-completeness and matrix tests).
std::vector<std::string> registered_ratio_losses();
std::vector<std::string> registered_gen_losses();

// -------------------------------------------------------------------------
// Data sources: an analytic fixture spec, or an empirical matrix sampled
// with replacement (rows are observations).
// -------------------------------------------------------------------------

class DataSource {
 public:
  explicit DataSource(DistSpec spec);
  explicit DataSource(Eigen::MatrixXd rows);

  Eigen::Index dim() const;
  SampleBatch draw(Eigen::Index n, RngState& rng,
                   SampleSource tag = SampleSource::real) const;
  const DistSpec* spec() const { return spec_ ? &*spec_ : nullptr; }

 private:
  std::optional<DistSpec> spec_;
  Eigen::MatrixXd rows_;
};

// -------------------------------------------------------------------------
// First-order optimizers on flat parameter vectors.
// -------------------------------------------------------------------------

struct OptimizerSpec {
  enum class Kind { sgd, adam };
  Kind kind = Kind::adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static OptimizerSpec sgd(double lr);
  static OptimizerSpec adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                            double eps = 1e-8);
  void validate() const;
};

struct OptState {
  Eigen::VectorXd m, v;
  long t = 0;
};

void optimizer_step(const OptimizerSpec& spec, Eigen::VectorXd& params,
                    const Eigen::VectorXd& grad, OptState& state);

// -------------------------------------------------------------------------
// Training configuration and report.
// -------------------------------------------------------------------------

struct TrainConfig {
  std::string ratio_loss = "bernoulli";
  std::string gen_loss = "nonsaturating";
  // Kernel for the mmd generator objective ("rbf:<sigma|median>" or
  // "poly:<degree>:<offset>").
  std::string loss_kernel = "rbf:median";
  int ratio_steps_per_gen_step = 1;
  OptimizerSpec opt{};
  Eigen::Index batch_size = 256;
  long iterations = 1000;
  // Class prior on the real class; pi_auto derives it from batch counts
  // (equal batches -> 0.5).
  double pi = 0.5;
  bool pi_auto = false;
  // Gaussian instance noise added to both real and generated batches,
  // decaying linearly to 0 over the run.
  double instance_noise_std = 0.0;
  std::uint64_t seed = 1;
  long log_every = 10;
  // Generated batches are drawn from the data source itself and generator
  // steps are skipped (indistinguishable-populations fixture).
  bool mirror_data = false;
  // Held-out evaluation: unbiased MMD between fresh generated samples and a
  // fixed real sample, logged per record.
  Eigen::Index eval_batch = 512;
  std::string eval_kernel = "rbf:median";

  void validate() const;
  double effective_pi() const;
};

struct TrainRecord {
  long iter = 0;
  double ratio_loss = 0.0;
  double gen_loss = 0.0;
  // Mean head output (D for probability heads, r for positive heads).
  double mean_stat_real = 0.0;
  double mean_stat_gen = 0.0;
  long clamp_events = 0;    // cumulative across both tapes
  double mmd2_heldout = 0.0;
  double wall_seconds = 0.0;  // cumulative; not part of the CSV artifact
};

struct TrainReport {
  std::vector<TrainRecord> records;
  bool aborted = false;
  long abort_iter = -1;
  std::string abort_loss;
  long abort_clamps = 0;
  double eval_sigma = 0.0;
  bool eval_sigma_floored = false;
  double total_seconds = 0.0;
};

// Fixed column order, no wall-clock columns: byte-identical for a fixed seed.
void write_report_csv(std::ostream& out, const TrainReport& report);

// Adds i.i.d. N(0, std^2) noise to every coordinate.
SampleBatch add_instance_noise(const SampleBatch& batch, double noise_std,
                               RngState& rng);

// gen may be nullptr iff gen_source is provided (fixed-generator ratio
// estimation) or cfg.mirror_data is set. gen_source overrides the generator
// as the origin of "generated" batches; generator steps then do nothing.
TrainReport train(const TrainConfig& cfg, const DataSource& data,
                  GeneratorNet* gen, RatioNet& ratio,
                  const DataSource* gen_source = nullptr);

}  // namespace ratiolab
