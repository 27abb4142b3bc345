#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "scoped/analytic.hpp"
#include "scoped/dsm.hpp"
#include "scoped/errors.hpp"
#include "scoped/mlp.hpp"
#include "scoped/rng.hpp"

using namespace scoped;

namespace {

std::vector<double> randn(std::mt19937_64& gen, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

Dataset gaussian_blobs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n01;
  Dataset d(2, {});
  for (std::size_t i = 0; i < n; ++i) {
    const double c = i % 2 == 0 ? -2.0 : 2.0;
    d.append(std::vector<double>{c + 0.5 * n01(gen), 0.5 * n01(gen)});
  }
  return d;
}

// Replays the draws train_dsm makes in its first epoch when the batch is the
// whole dataset.
std::vector<DsmDraw> replay_first_epoch(const Dataset& clean, const NoiseSchedule* schedule,
                                        const DsmTrainConfig& cfg, std::vector<std::size_t>& order) {
  Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::kTrain)}));
  order.resize(clean.rows());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());
  std::vector<DsmDraw> draws;
  for (std::size_t j = 0; j < clean.rows(); ++j) {
    DsmDraw d;
    if (cfg.sampling == NoiseSampling::kUniformSteps)
      d.level = level_at(*schedule, static_cast<int>(rng.integer(1, schedule->steps)));
    else
      d.level = continuous_level(std::exp(cfg.prior.mu + cfg.prior.sigma_log * rng.normal()));
    d.eps.resize(clean.dim);
    rng.fill_normal(d.eps);
    draws.push_back(std::move(d));
  }
  return draws;
}

}  // namespace

TEST_CASE("network layout and construction") {
  MlpSpec spec;
  spec.hidden = {8, 4};
  spec.frequencies = 3;
  const auto m = MlpDenoiser::create(5, spec, 1);
  CHECK(m.input_dim() == 5 + 1 + 6);
  CHECK(m.layer_sizes() == std::vector<std::size_t>{12, 8, 4, 5});
  CHECK(m.params().size() == 12 * 8 + 8 + 8 * 4 + 4 + 4 * 5 + 5);
  CHECK(m.smooth());
  spec.activation = Activation::kRelu;
  CHECK_FALSE(MlpDenoiser::create(5, spec, 1).smooth());
  CHECK_THROWS_AS(MlpDenoiser(5, spec, std::vector<double>(5, 0.0), std::vector<double>(5, 1.0), {1.0}), InputError);
  CHECK(MlpDenoiser::create(5, spec, 1).params() == MlpDenoiser::create(5, spec, 1).params());
  CHECK(MlpDenoiser::create(5, spec, 1).params() != MlpDenoiser::create(5, spec, 2).params());
}

TEST_CASE("preconditioning coefficients") {
  const NoiseLevel lv{0, 1.0, 0.5};
  const auto pc = preconditioning(lv);
  CHECK(pc.c_in == doctest::Approx(1.0 / std::sqrt(1.25)));
  CHECK(pc.c_skip == doctest::Approx(1.0 / 1.25));
  CHECK(pc.c_out == doctest::Approx(0.5 / std::sqrt(1.25)));
  CHECK(pc.c_noise == doctest::Approx(std::log(0.5) / 4.0));
  CHECK_THROWS_AS(preconditioning(kCleanLevel), InputError);
}

TEST_CASE("mlp jvp: primal bit-identical, tangent linear, matches finite differences") {
  const auto schedule = build_linear_schedule(1000, 1e-4, 0.02);
  std::mt19937_64 gen(11);
  for (auto param : {Parameterization::kEps, Parameterization::kDenoiser}) {
    for (auto act : {Activation::kSilu, Activation::kTanh}) {
      MlpSpec spec;
      spec.hidden = {32, 32};
      spec.activation = act;
      spec.parameterization = param;
      const auto m = MlpDenoiser::create(6, spec, 3);
      for (int trial = 0; trial < 10; ++trial) {
        const NoiseLevel lv = trial % 2 == 0 ? level_at(schedule, 1 + 97 * trial) : continuous_level(0.05 + 0.3 * trial);
        const auto x = randn(gen, 6);
        const auto v = randn(gen, 6);
        const auto w = randn(gen, 6);
        const auto jv = m.jvp(x, lv, v);
        CHECK(jv.score == m.evaluate(x, lv));
        const auto jw = m.jvp(x, lv, w);
        std::vector<double> sum(6);
        for (std::size_t i = 0; i < 6; ++i) sum[i] = 2.0 * v[i] - 3.0 * w[i];
        const auto js = m.jvp(x, lv, sum);
        for (std::size_t i = 0; i < 6; ++i)
          CHECK(js.tangent[i] == doctest::Approx(2.0 * jv.tangent[i] - 3.0 * jw.tangent[i]).epsilon(1e-10));
        const double h = 1e-4 * std::max(1.0, std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0)));
        const auto fd = oracle::fd_directional([&](std::span<const double> p) { return m.evaluate(p, lv); }, x, v, h);
        CHECK(oracle::rel_error(jv.tangent, fd) < 1e-4);
      }
    }
  }
}

TEST_CASE("first-epoch training loss equals the DSM objective on replayed draws") {
  const auto schedule = build_linear_schedule(1000, 1e-4, 0.02);
  const Dataset data = gaussian_blobs(200, 4);
  struct Case {
    Parameterization param;
    NoiseSampling sampling;
    WeightRule weight;
  };
  for (const Case c : {Case{Parameterization::kEps, NoiseSampling::kUniformSteps, WeightRule::kSigmaSquared},
                       Case{Parameterization::kDenoiser, NoiseSampling::kLogNormal, WeightRule::kEdm},
                       Case{Parameterization::kDenoiser, NoiseSampling::kUniformSteps, WeightRule::kUnit},
                       Case{Parameterization::kEps, NoiseSampling::kLogNormal, WeightRule::kEdm}}) {
    MlpSpec spec;
    spec.hidden = {16};
    spec.parameterization = c.param;
    const auto init = MlpDenoiser::create(2, spec, 9);
    DsmTrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 200;
    cfg.sampling = c.sampling;
    cfg.weight = c.weight;
    cfg.seed = 21;
    const auto result = train_dsm(init, data, &schedule, cfg);

    // Same standardization as training applied, then the original parameters.
    MlpDenoiser at_init(2, spec, result.model.data_mean(), result.model.data_std(), init.params());
    Dataset clean(2, {});
    for (std::size_t r = 0; r < data.rows(); ++r) clean.append(at_init.to_model_space(data.row(r)));
    std::vector<std::size_t> order;
    const auto draws = replay_first_epoch(clean, &schedule, cfg, order);
    Dataset shuffled(2, {});
    for (std::size_t j : order) shuffled.append(clean.row(j));
    const double want = dsm_loss(at_init, shuffled, draws, c.weight);
    CHECK(result.loss_trace[0] == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("manual backprop gradient signs agree with finite differences of the DSM objective") {
  const auto schedule = build_linear_schedule(1000, 1e-4, 0.02);
  const Dataset data = gaussian_blobs(64, 5);
  for (auto param : {Parameterization::kEps, Parameterization::kDenoiser}) {
    MlpSpec spec;
    spec.hidden = {5};
    spec.frequencies = 1;
    spec.activation = Activation::kTanh;
    spec.parameterization = param;
    const auto init = MlpDenoiser::create(2, spec, 2);
    DsmTrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 64;
    cfg.learning_rate = 1e-9;
    cfg.standardize = false;
    cfg.seed = 8;
    cfg.sampling = NoiseSampling::kLogNormal;
    cfg.weight = WeightRule::kEdm;
    const auto result = train_dsm(init, data, &schedule, cfg);

    std::vector<std::size_t> order;
    const auto draws = replay_first_epoch(data, &schedule, cfg, order);
    Dataset shuffled(2, {});
    for (std::size_t j : order) shuffled.append(data.row(j));

    int compared = 0;
    for (std::size_t k = 0; k < init.params().size(); ++k) {
      auto up = init.params();
      auto down = init.params();
      const double h = 1e-6;
      up[k] += h;
      down[k] -= h;
      const double fd =
          (dsm_loss(MlpDenoiser(2, spec, init.data_mean(), init.data_std(), up), shuffled, draws, cfg.weight) -
           dsm_loss(MlpDenoiser(2, spec, init.data_mean(), init.data_std(), down), shuffled, draws, cfg.weight)) /
          (2 * h);
      if (std::abs(fd) < 1e-4) continue;
      const double step = result.model.params()[k] - init.params()[k];
      // The first Adam step is -lr * g / (|g| + eps): a signed step of size ~lr.
      CHECK((step < 0) == (fd > 0));
      CHECK(std::abs(step) == doctest::Approx(cfg.learning_rate).epsilon(1e-3));
      ++compared;
    }
    CHECK(compared > 10);
  }
}

TEST_CASE("linear model on a one-step schedule: loss trace settles downward") {
  const auto schedule = build_linear_schedule(1, 0.3, 0.3);
  const Dataset data = gaussian_blobs(8192, 6);
  MlpSpec spec;
  spec.hidden = {};
  spec.frequencies = 0;
  DsmTrainConfig cfg;
  cfg.epochs = 60;
  cfg.batch_size = 8192;  // full batch; the objective is quadratic in the parameters
  cfg.learning_rate = 2e-2;
  cfg.seed = 1;
  const auto r = train_dsm(MlpDenoiser::create(2, spec, 1), data, &schedule, cfg);
  // Fresh noise each epoch adds about 1% Monte Carlo jitter; 5% is several standard errors.
  for (std::size_t i = 1; i < r.loss_trace.size(); ++i) CHECK(r.loss_trace[i] <= r.loss_trace[i - 1] * 1.05);
  CHECK(r.loss_trace.back() < 0.7 * r.loss_trace.front());
}

TEST_CASE("training is deterministic given the seed") {
  const auto schedule = build_linear_schedule(1000, 1e-4, 0.02);
  const Dataset data = gaussian_blobs(300, 7);
  MlpSpec spec;
  spec.hidden = {16, 16};
  DsmTrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 99;
  const auto a = train_dsm(MlpDenoiser::create(2, spec, 1), data, &schedule, cfg);
  const auto b = train_dsm(MlpDenoiser::create(2, spec, 1), data, &schedule, cfg);
  CHECK(a.loss_trace == b.loss_trace);
  CHECK(a.model.params() == b.model.params());
  cfg.seed = 100;
  CHECK(train_dsm(MlpDenoiser::create(2, spec, 1), data, &schedule, cfg).loss_trace != a.loss_trace);
}

TEST_CASE("a single repeated point becomes an attractor") {
  Dataset data(3, {});
  const std::vector<double> point{1.0, -2.0, 0.5};
  for (int i = 0; i < 256; ++i) data.append(point);
  MlpSpec spec;
  spec.hidden = {32, 32};
  spec.parameterization = Parameterization::kDenoiser;
  DsmTrainConfig cfg;
  cfg.epochs = 150;
  cfg.batch_size = 64;
  cfg.sampling = NoiseSampling::kLogNormal;
  cfg.weight = WeightRule::kEdm;
  cfg.seed = 4;
  const auto r = train_dsm(MlpDenoiser::create(3, spec, 1), data, nullptr, cfg);
  std::mt19937_64 gen(12);
  const NoiseLevel lv = continuous_level(0.1);
  const auto center = r.model.to_model_space(point);
  int toward = 0;
  for (int trial = 0; trial < 50; ++trial) {
    auto xt = center;
    const auto e = randn(gen, 3, 0.1);
    for (std::size_t i = 0; i < 3; ++i) xt[i] += e[i];
    const auto s = r.model.evaluate(xt, lv);
    double dot = 0.0;
    for (std::size_t i = 0; i < 3; ++i) dot += s[i] * (center[i] - xt[i]);
    toward += dot > 0.0 ? 1 : 0;
  }
  CHECK(toward == 50);
}

TEST_CASE("trained score field correlates with the corrupted two-gaussian marginal") {
  const auto schedule = build_linear_schedule(1000, 1e-4, 0.02);
  const Dataset data = gaussian_blobs(4000, 8);
  MlpSpec spec;
  spec.hidden = {64, 64};
  DsmTrainConfig cfg;
  cfg.epochs = 60;
  cfg.standardize = false;
  cfg.seed = 5;
  const auto r = train_dsm(MlpDenoiser::create(2, spec, 1), data, &schedule, cfg);
  const GmmScore truth({0.5, 0.5}, {{-2.0, 0.0}, {2.0, 0.0}}, {0.25, 0.25});
  for (int t : {50, 200}) {
    const NoiseLevel lv = level_at(schedule, t);
    std::vector<double> got, want;
    for (double a = -3.0; a <= 3.0; a += 0.25)
      for (double b = -3.0; b <= 3.0; b += 0.25) {
        const std::vector<double> x{a, b};
        for (double v : r.model.evaluate(x, lv)) got.push_back(v);
        for (double v : truth.evaluate(x, lv)) want.push_back(v);
      }
    CHECK(oracle::correlation(got, want) >= 0.95);
  }
}

TEST_CASE("training rejects bad configurations and surfaces non-finite losses") {
  const auto schedule = build_linear_schedule(1000, 1e-4, 0.02);
  const Dataset data = gaussian_blobs(64, 9);
  const auto m = MlpDenoiser::create(2, MlpSpec{}, 1);
  DsmTrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(train_dsm(m, data, &schedule, cfg), InputError);
  cfg.epochs = 1;
  CHECK_THROWS_AS(train_dsm(m, data, nullptr, cfg), InputError);
  CHECK_THROWS_AS(train_dsm(m, Dataset(2, {}), &schedule, cfg), InputError);
  CHECK_THROWS_AS(train_dsm(MlpDenoiser::create(3, MlpSpec{}, 1), data, &schedule, cfg), InputError);

  Dataset huge(2, {});
  for (int i = 0; i < 64; ++i) huge.append(std::vector<double>{i % 2 ? 1e300 : -1e300, 1e300});
  cfg.standardize = false;
  CHECK_THROWS_AS(train_dsm(m, huge, &schedule, cfg), NumericError);
}
