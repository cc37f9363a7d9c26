#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "ratiolab/trainer.hpp"

using namespace ratiolab;

namespace {

std::string report_csv(const TrainReport& report) {
  std::ostringstream out;
  write_report_csv(out, report);
  return out.str();
}

RatioNet fresh_ratio(Head head, std::uint64_t init_seed, int dim = 1) {
  RatioNet net(dim, {8}, head);
  RngState rng(init_seed);
  net.net().init_glorot(rng);
  return net;
}

GeneratorNet fresh_gen(std::uint64_t init_seed, int dim = 1) {
  GeneratorNet gen(1, {8}, dim);
  RngState rng(init_seed);
  gen.net().init_glorot(rng);
  return gen;
}

TrainConfig small_config(const std::string& ratio_loss, const std::string& gen_loss) {
  TrainConfig cfg;
  cfg.ratio_loss = ratio_loss;
  cfg.gen_loss = gen_loss;
  cfg.iterations = 10;
  cfg.batch_size = 8;
  cfg.eval_batch = 8;
  cfg.log_every = 10;
  cfg.opt = OptimizerSpec::adam(1e-3);
  cfg.seed = 99;
  return cfg;
}

}  // namespace

TEST_CASE("loss registries expose seventeen names each and all parse") {
  const std::vector<std::string> ratio = registered_ratio_losses();
  const std::vector<std::string> gen = registered_gen_losses();
  CHECK(ratio.size() == 17);
  CHECK(gen.size() == 17);
  for (const std::string& name : ratio) {
    CAPTURE(name);
    CHECK(parse_ratio_loss(name).name == name);
  }
  for (const std::string& name : gen) {
    CAPTURE(name);
    CHECK(parse_gen_loss(name).name == name);
  }
}

TEST_CASE("parsers classify names and reject the untrainable ones") {
  CHECK(parse_ratio_loss("bernoulli").kind == RatioLossKind::cpe);
  CHECK(parse_ratio_loss("fdiv:pearson_chi2").fdiv == FDiv::pearson_chi2);
  CHECK(parse_ratio_loss("lsif").kind == RatioLossKind::lsif);
  CHECK(parse_ratio_loss("bregman:kl").kind == RatioLossKind::bregman);
  CHECK(parse_gen_loss("minimax").variant == GenVariant::minimax);
  CHECK(parse_gen_loss("moment:3").moment_order == 3);
  CHECK(parse_gen_loss("mmd").kind == GenLossKind::mmd);

  CHECK_THROWS_WITH_AS(parse_ratio_loss("misclassification"),
                       doctest::Contains("available for evaluation"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_gen_loss("kliep"), doctest::Contains("unbounded below"),
                       std::invalid_argument);
  CHECK_THROWS_AS(parse_ratio_loss("wasserstein"), std::invalid_argument);
  CHECK_THROWS_AS(parse_gen_loss("moment:0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_gen_loss("moment:x"), std::invalid_argument);
}

TEST_CASE("optimizer steps match hand calculations") {
  Eigen::VectorXd params = Eigen::VectorXd::Constant(1, 1.0);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(1, 2.0);
  OptState state;
  optimizer_step(OptimizerSpec::sgd(0.1), params, grad, state);
  CHECK(params[0] == doctest::Approx(0.8).epsilon(1e-15));

  // adam with zero gradient leaves parameters untouched
  params.setConstant(1.0);
  state = OptState{};
  optimizer_step(OptimizerSpec::adam(0.05), params, Eigen::VectorXd::Zero(1), state);
  CHECK(params[0] == 1.0);

  // first adam step moves by ~ -lr * sign(grad) after bias correction
  params.setConstant(1.0);
  state = OptState{};
  optimizer_step(OptimizerSpec::adam(0.05), params, Eigen::VectorXd::Constant(1, 0.5), state);
  CHECK(params[0] == doctest::Approx(1.0 - 0.05).epsilon(1e-6));

  CHECK_THROWS_AS(OptimizerSpec::sgd(0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(OptimizerSpec::adam(1e-3, 1.0).validate(), std::invalid_argument);
}

TEST_CASE("instance noise is a no-op at zero and adds unit variance at one") {
  SampleBatch batch;
  batch.points = Eigen::MatrixXd::Zero(100000, 1);
  RngState rng(4242);
  const SampleBatch same = add_instance_noise(batch, 0.0, rng);
  CHECK((same.points.array() == batch.points.array()).all());

  const SampleBatch noisy = add_instance_noise(batch, 1.0, rng);
  const double var = noisy.points.array().square().mean() -
                     std::pow(noisy.points.array().mean(), 2);
  CHECK(var == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("config validation rejects out-of-range settings") {
  const DataSource data{DistSpec(GaussianSpec::standard(1))};
  TrainConfig cfg = small_config("bernoulli", "nonsaturating");
  cfg.pi = 1.5;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("0<pi<1"), std::invalid_argument);
  cfg.pi = 0.5;
  cfg.iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.iterations = 10;
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.batch_size = 8;
  cfg.eval_batch = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.eval_batch = 8;
  cfg.ratio_steps_per_gen_step = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.ratio_steps_per_gen_step = 1;
  cfg.validate();

  cfg.pi_auto = true;
  CHECK(cfg.effective_pi() == 0.5);

  RatioNet bad(1, {8}, Head::unconstrained);
  GeneratorNet gen = fresh_gen(7);
  CHECK_THROWS_WITH_AS(train(cfg, data, &gen, bad), doctest::Contains("unconstrained"),
                       std::invalid_argument);

  // a generator is required unless generated batches come from elsewhere
  RatioNet ratio = fresh_ratio(Head::probability, 8);
  CHECK_THROWS_AS(train(cfg, data, nullptr, ratio), std::invalid_argument);
}

TEST_CASE("identical seeds give byte-identical reports") {
  const DataSource data{DistSpec(GaussianSpec::standard(1))};
  TrainConfig cfg = small_config("bernoulli", "nonsaturating");
  cfg.iterations = 30;
  cfg.log_every = 5;

  std::string first;
  for (int run = 0; run < 2; ++run) {
    RatioNet ratio = fresh_ratio(Head::probability, 11);
    GeneratorNet gen = fresh_gen(22);
    const TrainReport report = train(cfg, data, &gen, ratio);
    CHECK_FALSE(report.aborted);
    if (run == 0) {
      first = report_csv(report);
    } else {
      CHECK(first == report_csv(report));
    }
  }

  cfg.seed = 100;
  RatioNet ratio = fresh_ratio(Head::probability, 11);
  GeneratorNet gen = fresh_gen(22);
  CHECK(first != report_csv(train(cfg, data, &gen, ratio)));
}

TEST_CASE("ratio updates are blind to the generator objective when batches are fixed") {
  // With generated batches drawn from a fixed source, only the generator
  // objective changes between runs; a leak of generator state into ratio
  // steps would show up as diverging ratio losses.
  const DataSource data{DistSpec(GaussianSpec::standard(1))};
  GaussianSpec shifted(Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Ones(1));
  const DataSource frozen{DistSpec(shifted)};

  TrainConfig cfg = small_config("bernoulli", "minimax");
  cfg.iterations = 40;
  cfg.log_every = 5;
  RatioNet a = fresh_ratio(Head::probability, 33);
  const TrainReport ra = train(cfg, data, nullptr, a, &frozen);

  cfg.gen_loss = "nonsaturating";
  RatioNet b = fresh_ratio(Head::probability, 33);
  const TrainReport rb = train(cfg, data, nullptr, b, &frozen);

  REQUIRE(ra.records.size() == rb.records.size());
  for (std::size_t i = 0; i < ra.records.size(); ++i) {
    CHECK(ra.records[i].ratio_loss == rb.records[i].ratio_loss);
    CHECK(ra.records[i].mean_stat_real == rb.records[i].mean_stat_real);
  }
  // the two objectives do score the same run differently
  CHECK(ra.records.back().gen_loss != rb.records.back().gen_loss);
}

TEST_CASE("every ratio objective trains against every generator objective") {
  const DataSource data{DistSpec(GaussianSpec::standard(1))};
  for (const std::string& ratio_name : registered_ratio_losses()) {
    const bool cpe = parse_ratio_loss(ratio_name).kind == RatioLossKind::cpe;
    for (const std::string& gen_name : registered_gen_losses()) {
      CAPTURE(ratio_name);
      CAPTURE(gen_name);
      TrainConfig cfg = small_config(ratio_name, gen_name);
      cfg.loss_kernel = "rbf:1.0";
      cfg.eval_kernel = "rbf:1.0";
      RatioNet ratio = fresh_ratio(cpe ? Head::probability : Head::positive, 55);
      GeneratorNet gen = fresh_gen(66);
      const TrainReport report = train(cfg, data, &gen, ratio);
      REQUIRE(report.records.size() == 2);  // iteration 0 and the final one
      CHECK_FALSE(report.aborted);
      CHECK(std::isfinite(report.records.back().ratio_loss));
      CHECK(std::isfinite(report.records.back().gen_loss));
      CHECK(std::isfinite(report.records.back().mmd2_heldout));
    }
  }
}

TEST_CASE("non-finite losses abort the run with a diagnosis") {
  const DataSource data{DistSpec(GaussianSpec::standard(1))};
  TrainConfig cfg = small_config("lsif", "moment:3");
  cfg.opt = OptimizerSpec::sgd(1e8);
  cfg.iterations = 50;
  cfg.log_every = 1;
  RatioNet ratio = fresh_ratio(Head::positive, 12);
  GeneratorNet gen = fresh_gen(13);
  const TrainReport report = train(cfg, data, &gen, ratio);
  CHECK(report.aborted);
  CHECK(report.abort_iter >= 0);
  CHECK_FALSE(report.abort_loss.empty());

  const std::string csv = report_csv(report);
  CHECK(csv.find("aborted") != std::string::npos);
}

TEST_CASE("report csv uses the fixed column header") {
  TrainReport report;
  TrainRecord rec;
  rec.iter = 10;
  rec.ratio_loss = 0.5;
  report.records.push_back(rec);
  const std::string csv = report_csv(report);
  CHECK(csv.rfind("iter,ratio_loss,gen_loss,mean_stat_real,mean_stat_gen,clamp_events,"
                  "mmd2_heldout\n",
                  0) == 0);
  CHECK(csv.find("wall") == std::string::npos);
}

TEST_CASE("a confident discriminator starves the minimax objective of gradient") {
  // Train the ratio model to separate two distant populations, then compare
  // generator gradient norms: the minimax objective saturates where D ~ 0
  // while the nonsaturating one keeps a usable signal.
  GaussianSpec far(Eigen::VectorXd::Constant(1, 4.0), Eigen::VectorXd::Ones(1) * 0.25);
  const DataSource data{DistSpec(far)};
  const DataSource near{DistSpec(GaussianSpec::standard(1))};

  TrainConfig cfg = small_config("bernoulli", "minimax");
  cfg.iterations = 200;
  cfg.log_every = 200;
  cfg.opt = OptimizerSpec::adam(5e-3);
  RatioNet ratio = fresh_ratio(Head::probability, 21, 1);
  const TrainReport report = train(cfg, data, nullptr, ratio, &near);
  REQUIRE_FALSE(report.aborted);

  GeneratorNet gen = fresh_gen(31);
  RngState zrng(41);
  Eigen::MatrixXd z(64, 1);
  for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, 0) = zrng.next_normal();

  auto grad_norm = [&](GenVariant variant) {
    ad::Tape tape;
    const Mlp::Bound gb = gen.net().bind(tape, true);
    const Mlp::Bound rb = ratio.net().bind(tape, false);
    ad::Var x_gen = gen.net().apply(tape, tape.leaf(z), gb);
    ad::Var d_gen = ratio.head_values(tape, x_gen, rb);
    ad::Var loss = generator_loss_cpe(variant, d_gen);
    tape.backward(loss);
    return gen.net().gather_grad(tape, gb).norm();
  };

  const double minimax_norm = grad_norm(GenVariant::minimax);
  const double nonsat_norm = grad_norm(GenVariant::nonsaturating);
  CHECK(minimax_norm < nonsat_norm);
  CHECK(minimax_norm < 0.1 * nonsat_norm);
}
