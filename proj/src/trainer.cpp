#include "ratiolab/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "ratiolab/ratio_matching.hpp"

namespace ratiolab {

// ---------------------------------------------------------------- registry

RatioLossSpec parse_ratio_loss(const std::string& name) {
  if (name == "lsif") return {RatioLossKind::lsif, name};
  if (name == "kliep") return {RatioLossKind::kliep, name};
  if (name.rfind("fdiv:", 0) == 0) {
    RatioLossSpec s{RatioLossKind::fdiv, name};
    s.fdiv = fdiv_by_name(name.substr(5));
    return s;
  }
  if (name.rfind("bregman:", 0) == 0) {
    RatioLossSpec s{RatioLossKind::bregman, name};
    s.fdiv = fdiv_by_name(name.substr(8));
    return s;
  }
  for (const ScoringRule& r : scoring_rules()) {
    if (r.name == name) {
      if (!r.differentiable) {
        throw std::invalid_argument("ratio loss '" + name +
                                    "' has zero gradient almost everywhere and cannot be trained; "
                                    "it remains available for evaluation");
      }
      RatioLossSpec s{RatioLossKind::cpe, name};
      s.rule = r.kind;
      return s;
    }
  }
  throw std::invalid_argument("unknown ratio loss: " + name);
}

GenLossSpec parse_gen_loss(const std::string& name) {
  if (name == "minimax" || name == "nonsaturating" || name == "log_ratio") {
    GenLossSpec s{GenLossKind::cpe, name};
    s.variant = gen_variant_by_name(name);
    return s;
  }
  if (name == "kliep") {
    throw std::invalid_argument(
        "kliep cannot serve as a generator loss: its model-dependent term "
        "mean(r_gen - 1) is linear in r and unbounded below, so the generator "
        "step has no minimiser");
  }
  if (name.rfind("fdiv:", 0) == 0) {
    GenLossSpec s{GenLossKind::fdiv, name};
    s.fdiv = fdiv_by_name(name.substr(5));
    return s;
  }
  if (name.rfind("bregman:", 0) == 0) {
    GenLossSpec s{GenLossKind::bregman, name};
    s.fdiv = fdiv_by_name(name.substr(8));
    return s;
  }
  if (name.rfind("moment:", 0) == 0) {
    int order = 0;
    try {
      std::size_t used = 0;
      order = std::stoi(name.substr(7), &used);
      if (used != name.size() - 7) order = 0;
    } catch (const std::exception&) {
      order = 0;
    }
    if (order < 1) {
      throw std::invalid_argument("moment generator loss needs a positive integer order, e.g. moment:2");
    }
    GenLossSpec s{GenLossKind::moment, name};
    s.moment_order = order;
    return s;
  }
  if (name == "mmd") return {GenLossKind::mmd, name};
  throw std::invalid_argument("unknown generator loss: " + name);
}

std::vector<std::string> registered_ratio_losses() {
  std::vector<std::string> names;
  for (const ScoringRule& r : scoring_rules()) {
    if (r.differentiable) names.push_back(r.name);
  }
  for (FDiv kind : all_fdivs()) names.push_back("fdiv:" + fdiv_name(kind));
  names.push_back("lsif");
  names.push_back("kliep");
  for (FDiv kind : all_fdivs()) names.push_back("bregman:" + fdiv_name(kind));
  return names;
}

std::vector<std::string> registered_gen_losses() {
  std::vector<std::string> names = {"minimax", "nonsaturating", "log_ratio"};
  for (FDiv kind : all_fdivs()) names.push_back("fdiv:" + fdiv_name(kind));
  for (FDiv kind : all_fdivs()) names.push_back("bregman:" + fdiv_name(kind));
  names.push_back("moment:1");
  names.push_back("moment:2");
  names.push_back("moment:3");
  names.push_back("mmd");
  return names;
}

// ------------------------------------------------------------- data source

DataSource::DataSource(DistSpec spec) : spec_(std::move(spec)) {}

DataSource::DataSource(Eigen::MatrixXd rows) : rows_(std::move(rows)) {
  if (rows_.rows() == 0 || rows_.cols() == 0) {
    throw std::invalid_argument("DataSource: empty data matrix");
  }
  if (!rows_.allFinite()) {
    throw std::invalid_argument("DataSource: data matrix has non-finite entries");
  }
}

Eigen::Index DataSource::dim() const {
  return spec_ ? spec_dim(*spec_) : rows_.cols();
}

SampleBatch DataSource::draw(Eigen::Index n, RngState& rng, SampleSource tag) const {
  if (spec_) return sample(*spec_, n, rng, tag);
  if (n < 1) throw std::invalid_argument("DataSource::draw: n must be positive");
  SampleBatch batch;
  batch.source = tag;
  batch.seed_trace = rng.state;
  batch.points.resize(n, rows_.cols());
  const auto m = rows_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    auto idx = static_cast<Eigen::Index>(rng.next_unit() * static_cast<double>(m));
    if (idx >= m) idx = m - 1;
    batch.points.row(i) = rows_.row(idx);
  }
  return batch;
}

// -------------------------------------------------------------- optimizers

OptimizerSpec OptimizerSpec::sgd(double lr) {
  OptimizerSpec s;
  s.kind = Kind::sgd;
  s.lr = lr;
  s.validate();
  return s;
}

OptimizerSpec OptimizerSpec::adam(double lr, double beta1, double beta2, double eps) {
  OptimizerSpec s;
  s.kind = Kind::adam;
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  s.validate();
  return s;
}

void OptimizerSpec::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw std::invalid_argument("optimizer: learning rate must be positive");
  }
  if (kind == Kind::adam) {
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
      throw std::invalid_argument("optimizer: adam betas must lie in [0,1)");
    }
    if (!(eps > 0.0)) throw std::invalid_argument("optimizer: adam eps must be positive");
  }
}

void optimizer_step(const OptimizerSpec& spec, Eigen::VectorXd& params,
                    const Eigen::VectorXd& grad, OptState& state) {
  if (params.size() != grad.size()) {
    throw std::invalid_argument("optimizer_step: parameter/gradient shape mismatch");
  }
  if (spec.kind == OptimizerSpec::Kind::sgd) {
    params -= spec.lr * grad;
    return;
  }
  if (state.m.size() == 0) {
    state.m = Eigen::VectorXd::Zero(params.size());
    state.v = Eigen::VectorXd::Zero(params.size());
    state.t = 0;
  } else if (state.m.size() != params.size()) {
    throw std::invalid_argument("optimizer_step: optimizer state shape mismatch");
  }
  state.t += 1;
  state.m = spec.beta1 * state.m + (1.0 - spec.beta1) * grad;
  state.v = spec.beta2 * state.v.array().matrix() + (1.0 - spec.beta2) * grad.array().square().matrix();
  const double bc1 = 1.0 - std::pow(spec.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(spec.beta2, static_cast<double>(state.t));
  params.array() -= spec.lr * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + spec.eps);
}

// ------------------------------------------------------------------ config

void TrainConfig::validate() const {
  parse_ratio_loss(ratio_loss);
  const GenLossSpec g = parse_gen_loss(gen_loss);
  if (g.kind == GenLossKind::mmd) parse_kernel(loss_kernel);
  parse_kernel(eval_kernel);
  if (ratio_steps_per_gen_step < 1) {
    throw std::invalid_argument("train: ratio_steps_per_gen_step must be >= 1");
  }
  opt.validate();
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (iterations < 1) throw std::invalid_argument("train: iterations must be >= 1");
  if (!pi_auto && !(pi > 0.0 && pi < 1.0)) {
    throw std::invalid_argument("train: constraint 0<pi<1 violated (or use pi = auto)");
  }
  if (!(instance_noise_std >= 0.0) || !std::isfinite(instance_noise_std)) {
    throw std::invalid_argument("train: instance_noise_std must be >= 0");
  }
  if (log_every < 1) throw std::invalid_argument("train: log_every must be >= 1");
  if (eval_batch < 2) throw std::invalid_argument("train: eval_batch must be >= 2");
}

double TrainConfig::effective_pi() const {
  // Equal real/generated batch sizes, so the count-derived prior is 1/2.
  return pi_auto ? 0.5 : pi;
}

// ------------------------------------------------------------------- noise

SampleBatch add_instance_noise(const SampleBatch& batch, double noise_std, RngState& rng) {
  if (noise_std < 0.0) throw std::invalid_argument("add_instance_noise: std must be >= 0");
  if (noise_std == 0.0) return batch;
  SampleBatch out = batch;
  for (Eigen::Index i = 0; i < out.points.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.points.cols(); ++j) {
      out.points(i, j) += noise_std * rng.next_normal();
    }
  }
  return out;
}

// ------------------------------------------------------------------ report

void write_report_csv(std::ostream& out, const TrainReport& report) {
  out << "iter,ratio_loss,gen_loss,mean_stat_real,mean_stat_gen,clamp_events,mmd2_heldout\n";
  char buf[64];
  for (const TrainRecord& r : report.records) {
    out << r.iter;
    const double cols[] = {r.ratio_loss, r.gen_loss, r.mean_stat_real, r.mean_stat_gen};
    for (double v : cols) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out << buf;
    }
    out << ',' << r.clamp_events;
    std::snprintf(buf, sizeof buf, ",%.17g", r.mmd2_heldout);
    out << buf << '\n';
  }
  if (report.aborted) {
    out << "# aborted,iter=" << report.abort_iter << ",loss=" << report.abort_loss
        << ",clamp_events=" << report.abort_clamps << '\n';
  }
}

// ---------------------------------------------------------------- training

namespace {

ad::Var as_disc(Head head, ad::Var stat) {
  return head == Head::probability ? stat : ratio_to_disc(stat);
}

ad::Var as_ratio(Head head, ad::Var stat) {
  return head == Head::probability ? disc_to_ratio(stat) : stat;
}

Eigen::ArrayXd as_disc(Head head, const Eigen::ArrayXd& stat, ClampCounter*) {
  return head == Head::probability ? stat : ratio_to_disc(stat);
}

Eigen::ArrayXd as_ratio(Head head, const Eigen::ArrayXd& stat, ClampCounter* clamps) {
  return head == Head::probability ? disc_to_ratio(stat, clamps) : stat;
}

ad::Var build_ratio_loss(const RatioLossSpec& spec, Head head, ad::Var stat_real,
                         ad::Var stat_gen, ClassBalance bal) {
  switch (spec.kind) {
    case RatioLossKind::cpe:
      return ratio_loss_cpe(scoring_rule_by_name(spec.name), as_disc(head, stat_real),
                            as_disc(head, stat_gen), bal);
    case RatioLossKind::fdiv:
      return fdiv_ratio_loss(spec.fdiv, as_ratio(head, stat_real), as_ratio(head, stat_gen));
    case RatioLossKind::lsif:
      return lsif_loss(as_ratio(head, stat_real), as_ratio(head, stat_gen));
    case RatioLossKind::kliep:
      return kliep_loss(as_ratio(head, stat_real), as_ratio(head, stat_gen));
    case RatioLossKind::bregman:
      return bregman_ratio_loss(spec.fdiv, as_ratio(head, stat_real), as_ratio(head, stat_gen));
  }
  throw std::logic_error("build_ratio_loss: unknown kind");
}

double eval_ratio_loss(const RatioLossSpec& spec, Head head, const Eigen::ArrayXd& stat_real,
                       const Eigen::ArrayXd& stat_gen, ClassBalance bal) {
  switch (spec.kind) {
    case RatioLossKind::cpe:
      return ratio_loss_cpe(scoring_rule_by_name(spec.name), as_disc(head, stat_real, nullptr),
                            as_disc(head, stat_gen, nullptr), bal);
    case RatioLossKind::fdiv:
      return fdiv_ratio_loss(spec.fdiv, as_ratio(head, stat_real, nullptr),
                             as_ratio(head, stat_gen, nullptr));
    case RatioLossKind::lsif:
      return lsif_loss(as_ratio(head, stat_real, nullptr), as_ratio(head, stat_gen, nullptr));
    case RatioLossKind::kliep:
      return kliep_loss(as_ratio(head, stat_real, nullptr), as_ratio(head, stat_gen, nullptr));
    case RatioLossKind::bregman:
      return bregman_ratio_loss(spec.fdiv, as_ratio(head, stat_real, nullptr),
                                as_ratio(head, stat_gen, nullptr));
  }
  throw std::logic_error("eval_ratio_loss: unknown kind");
}

double eval_gen_loss(const GenLossSpec& spec, Head head, const Eigen::ArrayXd& stat_gen,
                     const Eigen::MatrixXd& x_real, const Eigen::MatrixXd& x_gen,
                     const KernelSpec& kernel) {
  switch (spec.kind) {
    case GenLossKind::cpe:
      return generator_loss_cpe(spec.variant, as_disc(head, stat_gen, nullptr));
    case GenLossKind::fdiv:
      return fdiv_generator_loss(spec.fdiv, as_ratio(head, stat_gen, nullptr));
    case GenLossKind::bregman:
      return bregman_generator_loss(spec.fdiv, as_ratio(head, stat_gen, nullptr));
    case GenLossKind::moment:
      return moment_loss(TestStatistic::raw(spec.moment_order), x_real, x_gen);
    case GenLossKind::mmd:
      return mmd2_biased(kernel, x_real, x_gen);
  }
  throw std::logic_error("eval_gen_loss: unknown kind");
}

}  // namespace

TrainReport train(const TrainConfig& cfg, const DataSource& data, GeneratorNet* gen,
                  RatioNet& ratio, const DataSource* gen_source) {
  cfg.validate();
  const RatioLossSpec rspec = parse_ratio_loss(cfg.ratio_loss);
  const GenLossSpec gspec = parse_gen_loss(cfg.gen_loss);

  if (cfg.mirror_data && gen_source == nullptr) gen_source = &data;
  const bool fixed_gen = gen_source != nullptr;
  if (!fixed_gen && gen == nullptr) {
    throw std::invalid_argument("train: need a generator net or a generated-sample source");
  }
  if (ratio.head() == Head::unconstrained) {
    throw std::invalid_argument(
        "train: unconstrained heads define neither D nor r; use a probability or positive head");
  }

  const Eigen::Index d = data.dim();
  const Eigen::Index B = cfg.batch_size;
  if (ratio.net().in_dim() != d) {
    throw std::invalid_argument("train: ratio net input dimension does not match data");
  }
  if (!fixed_gen && gen->data_dim() != d) {
    throw std::invalid_argument("train: generator output dimension does not match data");
  }
  if (fixed_gen && gen_source->dim() != d) {
    throw std::invalid_argument("train: generated-sample source dimension does not match data");
  }

  const ClassBalance bal(cfg.effective_pi());
  const Head head = ratio.head();

  RngState data_rng = RngState(cfg.seed).split(1);
  RngState gensrc_rng = RngState(cfg.seed).split(2);
  RngState latent_rng = RngState(cfg.seed).split(3);
  RngState noise_rng = RngState(cfg.seed).split(4);
  RngState heldout_rng = RngState(cfg.seed).split(5);
  RngState eval_rng = RngState(cfg.seed).split(6);

  TrainReport report;

  // Held-out evaluation setup; bandwidths are fixed once here so the logged
  // metric (and any mmd training objective) stays stationary over the run.
  const SampleBatch heldout = data.draw(cfg.eval_batch, heldout_rng);
  auto draw_generated = [&](Eigen::Index n, RngState& rng) {
    if (fixed_gen) return gen_source->draw(n, rng, SampleSource::generated).points;
    const SampleBatch z = gen->sample_latent(n, rng);
    return generate(*gen, z).points;
  };

  KernelChoice eval_kc = parse_kernel(cfg.eval_kernel);
  {
    const Eigen::MatrixXd y0 = draw_generated(cfg.eval_batch, eval_rng);
    if (eval_kc.median) {
      bool floored = false;
      eval_kc.spec.sigma = median_heuristic(heldout.points, y0, &floored);
      report.eval_sigma_floored = floored;
    }
    report.eval_sigma = eval_kc.spec.kind == KernelSpec::Kind::rbf ? eval_kc.spec.sigma : 0.0;
  }

  KernelChoice loss_kc = parse_kernel(cfg.loss_kernel);
  if (gspec.kind == GenLossKind::mmd && loss_kc.median) {
    RngState kr = RngState(cfg.seed).split(7);
    RngState kg = RngState(cfg.seed).split(8);
    const Eigen::MatrixXd xr = data.draw(B, kr).points;
    const Eigen::MatrixXd xg = draw_generated(B, kg);
    loss_kc.spec.sigma = median_heuristic(xr, xg);
  }

  // Ratio-step tape: data batches in, scalar objective out; ratio parameters
  // are the only gradient leaves. Built once, replayed every step.
  ad::Tape rt;
  ad::Var rx_real = rt.leaf(Eigen::MatrixXd::Zero(B, d), false);
  ad::Var rx_gen = rt.leaf(Eigen::MatrixXd::Zero(B, d), false);
  const Mlp::Bound rbound = ratio.net().bind(rt, true);
  ad::Var stat_real = ratio.head_values(rt, rx_real, rbound);
  ad::Var stat_gen = ratio.head_values(rt, rx_gen, rbound);
  ad::Var rloss = build_ratio_loss(rspec, head, stat_real, stat_gen, bal);

  // Generator-step tape: latent batch in, generator parameters are gradient
  // leaves, ratio parameters enter as refreshed constants.
  ad::Tape gt;
  ad::Var gz, gnoise, greal, gloss;
  Mlp::Bound gbound, grbound;
  const bool gen_uses_real = gspec.kind == GenLossKind::moment || gspec.kind == GenLossKind::mmd;
  if (!fixed_gen) {
    gz = gt.leaf(Eigen::MatrixXd::Zero(B, gen->latent_dim()), false);
    gnoise = gt.leaf(Eigen::MatrixXd::Zero(B, d), false);
    gbound = gen->net().bind(gt, true);
    grbound = ratio.net().bind(gt, false);
    ad::Var gx = gen->net().apply(gt, gz, gbound) + gnoise;
    if (gen_uses_real) {
      greal = gt.leaf(Eigen::MatrixXd::Zero(B, d), false);
      gloss = gspec.kind == GenLossKind::moment
                  ? moment_loss(TestStatistic::raw(gspec.moment_order), greal, gx)
                  : mmd2_biased(loss_kc.spec, greal, gx);
    } else {
      ad::Var gstat = ratio.head_values(gt, gx, grbound);
      switch (gspec.kind) {
        case GenLossKind::cpe:
          gloss = generator_loss_cpe(gspec.variant, as_disc(head, gstat));
          break;
        case GenLossKind::fdiv:
          gloss = fdiv_generator_loss(gspec.fdiv, as_ratio(head, gstat));
          break;
        case GenLossKind::bregman:
          gloss = bregman_generator_loss(gspec.fdiv, as_ratio(head, gstat));
          break;
        default:
          throw std::logic_error("train: unexpected generator loss kind");
      }
    }
  }

  OptState rstate, gstate;
  Eigen::MatrixXd last_real = Eigen::MatrixXd::Zero(B, d);
  Eigen::MatrixXd last_gen = Eigen::MatrixXd::Zero(B, d);
  const double decay_span = static_cast<double>(std::max<long>(1, cfg.iterations - 1));
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  auto total_clamps = [&] { return rt.clamp_events() + gt.clamp_events(); };
  auto abort_with = [&](long iter, const std::string& loss_name) {
    report.aborted = true;
    report.abort_iter = iter;
    report.abort_loss = loss_name;
    report.abort_clamps = total_clamps();
    report.total_seconds = elapsed();
    return report;
  };

  for (long iter = 0; iter < cfg.iterations; ++iter) {
    const double sigma_t =
        cfg.instance_noise_std * (1.0 - static_cast<double>(iter) / decay_span);

    for (int s = 0; s < cfg.ratio_steps_per_gen_step; ++s) {
      SampleBatch xr = data.draw(B, data_rng);
      SampleBatch xg;
      if (fixed_gen) {
        xg = gen_source->draw(B, gensrc_rng, SampleSource::generated);
      } else {
        xg = generate(*gen, gen->sample_latent(B, latent_rng));
      }
      xr = add_instance_noise(xr, sigma_t, noise_rng);
      xg = add_instance_noise(xg, sigma_t, noise_rng);
      last_real = xr.points;
      last_gen = xg.points;

      rt.set_value(rx_real, xr.points);
      rt.set_value(rx_gen, xg.points);
      rt.replay();
      if (!std::isfinite(rloss.scalar())) return abort_with(iter, rspec.name);
      rt.backward(rloss);
      const Eigen::VectorXd grad = ratio.net().gather_grad(rt, rbound);
      optimizer_step(cfg.opt, ratio.net().params().values(), grad, rstate);
      ratio.net().push_params(rt, rbound);
    }

    double gen_loss_value;
    if (!fixed_gen) {
      const SampleBatch z = gen->sample_latent(B, latent_rng);
      gt.set_value(gz, z.points);
      Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(B, d);
      if (sigma_t > 0.0) {
        for (Eigen::Index i = 0; i < B; ++i) {
          for (Eigen::Index j = 0; j < d; ++j) noise(i, j) = sigma_t * noise_rng.next_normal();
        }
      }
      gt.set_value(gnoise, noise);
      if (gen_uses_real) {
        SampleBatch xr = data.draw(B, data_rng);
        xr = add_instance_noise(xr, sigma_t, noise_rng);
        gt.set_value(greal, xr.points);
      }
      ratio.net().push_params(gt, grbound);
      gt.replay();
      gen_loss_value = gloss.scalar();
      if (!std::isfinite(gen_loss_value)) return abort_with(iter, gspec.name);
      gt.backward(gloss);
      const Eigen::VectorXd grad = gen->net().gather_grad(gt, gbound);
      optimizer_step(cfg.opt, gen->net().params().values(), grad, gstate);
      gen->net().push_params(gt, gbound);
    } else {
      gen_loss_value = eval_gen_loss(gspec, head, stat_gen.value().array().col(0), last_real,
                                     last_gen, loss_kc.spec);
      if (!std::isfinite(gen_loss_value)) return abort_with(iter, gspec.name);
    }

    if (iter % cfg.log_every == 0 || iter == cfg.iterations - 1) {
      TrainRecord rec;
      rec.iter = iter;
      rec.ratio_loss = rloss.scalar();
      rec.gen_loss = gen_loss_value;
      rec.mean_stat_real = stat_real.value().mean();
      rec.mean_stat_gen = stat_gen.value().mean();
      rec.clamp_events = total_clamps();
      rec.mmd2_heldout =
          mmd2_unbiased(eval_kc.spec, heldout.points, draw_generated(cfg.eval_batch, eval_rng));
      rec.wall_seconds = elapsed();
      report.records.push_back(rec);
    }
  }

  report.total_seconds = elapsed();
  return report;
}

}  // namespace ratiolab
