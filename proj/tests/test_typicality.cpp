#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "scoped/analytic.hpp"
#include "scoped/errors.hpp"
#include "scoped/typicality.hpp"

using namespace scoped;

namespace {

std::vector<double> randn(std::mt19937_64& gen, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

GmmScore three_component(std::size_t d) {
  std::vector<std::vector<double>> means(3, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) {
    means[0][i] = 1.5;
    means[1][i] = i % 2 == 0 ? -1.0 : 1.0;
    means[2][i] = -0.5;
  }
  return GmmScore({0.5, 0.3, 0.2}, means, {0.4, 1.0, 0.7});
}

// Returns NaN scores, to exercise the failure path.
class BrokenModel final : public ScoreModel {
 public:
  std::size_t dim() const override { return 2; }
  std::vector<double> evaluate(std::span<const double>, const NoiseLevel&) const override {
    return {NAN, 0.0};
  }
  ScoreJvp jvp(std::span<const double> x, const NoiseLevel& lv, std::span<const double>) const override {
    return {evaluate(x, lv), {0.0, 0.0}};
  }
  std::vector<std::uint8_t> serialize() const override { return {}; }
};

}  // namespace

TEST_CASE("config validation") {
  TypicalityConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.num_probes = 0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg.num_probes = 1;
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  CHECK(parse_probe_kind("gaussian") == ProbeKind::kGaussian);
  CHECK(parse_noise_mode("fixed") == NoiseMode::kFixed);
  CHECK_THROWS_AS(parse_probe_kind("sphere"), InputError);
}

TEST_CASE("rademacher probes give the exact trace of an isotropic jacobian") {
  AnalyticGaussianScore g(std::vector<double>(5, 0.0), 1.0);
  std::mt19937_64 gen(1);
  for (std::uint32_t k : {1u, 3u, 10u}) {
    TypicalityConfig cfg;
    cfg.num_probes = k;
    Rng rng(k);
    CHECK(hutchinson_trace(g, randn(gen, 5), kCleanLevel, cfg, rng) == -5.0);
  }
  TypicalityConfig bad;
  bad.num_probes = 0;
  Rng rng(0);
  CHECK_THROWS_AS(hutchinson_trace(g, randn(gen, 5), kCleanLevel, bad, rng), InputError);
}

TEST_CASE("gaussian probes converge to the coordinate-JVP trace of a mixture") {
  const GmmScore m = three_component(3);
  const std::vector<double> x{0.3, -0.2, 0.8};
  const double exact = oracle::exact_trace(m, x, kCleanLevel);
  TypicalityConfig cfg;
  cfg.num_probes = 100000;
  cfg.probe_kind = ProbeKind::kGaussian;
  Rng rng(7);
  const double est = hutchinson_trace(m, x, kCleanLevel, cfg, rng);
  CHECK(std::abs(est - exact) <= 0.02 * std::abs(exact));
}

TEST_CASE("hutchinson error shrinks like 1/sqrt(K)") {
  const GmmScore m = three_component(6);
  const std::vector<double> x{0.3, -0.2, 0.8, 1.0, 0.0, -0.4};
  const double exact = oracle::exact_trace(m, x, kCleanLevel);
  auto error_std = [&](std::uint32_t k) {
    TypicalityConfig cfg;
    cfg.num_probes = k;
    cfg.probe_kind = ProbeKind::kGaussian;
    Rng rng(100 + k);
    std::vector<double> err;
    for (int r = 0; r < 4000; ++r) err.push_back(hutchinson_trace(m, x, kCleanLevel, cfg, rng) - exact);
    return oracle::stddev(err);
  };
  const double ratio = error_std(16) / error_std(4);
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.25));
}

TEST_CASE("typicality ratio") {
  CHECK(typicality_ratio(0.0, -3.0, 1e-12) == 0.0);
  // Isotropic Gaussian on the shell ||x||^2 = d sigma^2.
  const double d = 10.0, var = 2.5;
  const double norm_sq = (d * var) / (var * var);
  CHECK(typicality_ratio(norm_sq, -d / var, 1e-12) == doctest::Approx(1.0).epsilon(1e-12));
  // Negative curvature is kept, not clamped.
  CHECK(typicality_ratio(1.0, 2.0, 1e-12) < 0.0);
  // Epsilon keeps a zero trace finite.
  CHECK(std::isfinite(typicality_ratio(1.0, 0.0, 1e-12)));
}

TEST_CASE("ratio on isotropic gaussian samples: mean near 1, std near sqrt(2/d)") {
  const std::size_t d = 100;
  AnalyticGaussianScore g(std::vector<double>(d, 0.0), 1.0);
  std::mt19937_64 gen(2);
  TypicalityConfig cfg;
  Rng rng(3);
  std::vector<double> ts;
  for (int i = 0; i < 10000; ++i) {
    const auto x = randn(gen, d);
    const auto s = g.evaluate(x, kCleanLevel);
    double n2 = 0.0;
    for (double v : s) n2 += v * v;
    ts.push_back(typicality_ratio(n2, hutchinson_trace(g, x, kCleanLevel, cfg, rng), cfg.epsilon));
  }
  CHECK(oracle::mean(ts) >= 0.97);
  CHECK(oracle::mean(ts) <= 1.03);
  CHECK(oracle::stddev(ts) >= 0.11);
  CHECK(oracle::stddev(ts) <= 0.17);
}

TEST_CASE("sign factor") {
  const std::vector<double> a{1.0, -2.0};
  CHECK(sign_factor(a) == -1);
  const std::vector<double> z{0.0, 0.0};
  CHECK(sign_factor(z) == 1);
  const std::vector<double> cancel{1.5, -1.5};
  CHECK(sign_factor(cancel) == 1);
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 1000; ++trial) {
    auto v = randn(gen, 1 + trial % 9);
    double sum = 0.0;
    for (double x : v) sum += x;
    const int before = sign_factor(v);
    for (double& x : v) x = -x;
    if (sum != 0.0) REQUIRE(sign_factor(v) == -before);
  }
}

TEST_CASE("ratio is the same under the negative-score convention") {
  // s' = -s and kappa' = +Tr(grad s') = -Tr(grad s) leave ||s||^2 / kappa unchanged.
  std::mt19937_64 gen(5);
  const GmmScore m = three_component(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = randn(gen, 4, 1.5);
    const auto s = m.evaluate(x, kCleanLevel);
    const double tr = oracle::exact_trace(m, x, kCleanLevel);
    double n2 = 0.0, n2_neg = 0.0;
    for (double v : s) {
      n2 += v * v;
      n2_neg += (-v) * (-v);
    }
    const double kappa_neg = -tr;  // Tr of grad(-s)
    CHECK(typicality_ratio(n2, tr, 1e-12) == n2_neg / (kappa_neg + 1e-12));
  }
}

TEST_CASE("fisher identity: E||s||^2 equals E[-Tr grad s] on gaussian and mixture oracles") {
  std::mt19937_64 gen(6);
  const std::size_t d = 8;
  const AnalyticGaussianScore g(std::vector<double>(d, 0.5), 0.8);
  const GmmScore m = three_component(d);
  std::discrete_distribution<int> pick({0.5, 0.3, 0.2});
  for (int which = 0; which < 2; ++which) {
    const ScoreModel& model = which == 0 ? static_cast<const ScoreModel&>(g) : m;
    std::vector<double> diff;
    for (int i = 0; i < 10000; ++i) {
      std::vector<double> x;
      if (which == 0) {
        x = randn(gen, d, std::sqrt(0.8));
        for (auto& v : x) v += 0.5;
      } else {
        const int k = pick(gen);
        x = randn(gen, d, std::sqrt(m.variances()[static_cast<std::size_t>(k)]));
        for (std::size_t j = 0; j < d; ++j) x[j] += m.means()[static_cast<std::size_t>(k)][j];
      }
      const auto s = model.evaluate(x, kCleanLevel);
      double n2 = 0.0;
      for (double v : s) n2 += v * v;
      diff.push_back(n2 + oracle::exact_trace(model, x, kCleanLevel));
    }
    const double se = oracle::stddev(diff) / std::sqrt(static_cast<double>(diff.size()));
    CHECK(std::abs(oracle::mean(diff)) <= 3.0 * se);
  }
}

TEST_CASE("closed form: unsigned ratio equals ||x_t||^2 / (d sigma_eff^2) under rademacher probes") {
  const auto schedule = build_linear_schedule(1000, 1e-4, 0.02);
  const std::size_t d = 16;
  const AnalyticGaussianScore g(std::vector<double>(d, 0.0), 1.3);
  TypicalityConfig cfg;
  cfg.apply_sign = false;
  cfg.seed = 9;
  std::mt19937_64 gen(7);
  for (int t : {1, 100, 300, 999}) {
    const NoiseLevel lv = level_at(schedule, t);
    for (std::uint64_t i = 0; i < 20; ++i) {
      const auto x0 = randn(gen, d);
      const auto r = scoped_statistic(g, x0, t, schedule, cfg, {Domain::kScore, i});
      const auto eps = corruption_noise(cfg, d, lv, {Domain::kScore, i});
      const auto xt = corrupt(x0, lv, eps);
      double n2 = 0.0;
      for (double v : xt) n2 += v * v;
      const double veff = g.marginal_variance(lv);
      CHECK(r.t_value == doctest::Approx(n2 / (d * veff)).epsilon(1e-12));
      CHECK(r.curvature == doctest::Approx(d / veff).epsilon(1e-14));
      CHECK(r.score_norm_sq >= 0.0);
      CHECK(r.t_value == r.sign * r.score_norm_sq / (r.curvature + cfg.epsilon));
    }
  }
}

TEST_CASE("in-distribution draws concentrate at the chi-square rate; scaled draws sit far above") {
  const auto schedule = build_linear_schedule(1000, 1e-4, 0.02);
  const std::size_t d = 64;
  const AnalyticGaussianScore g(std::vector<double>(d, 0.0), 1.0);
  TypicalityConfig cfg;
  cfg.apply_sign = false;
  std::mt19937_64 gen(8);
  const int n = 4000;
  int near_one = 0, far = 0;
  for (int i = 0; i < n; ++i) {
    const auto x0 = randn(gen, d);
    auto scaled = x0;
    for (auto& v : scaled) v *= 5.0;
    const auto key = SampleKey{Domain::kScore, static_cast<std::uint64_t>(i)};
    near_one += std::abs(scoped_statistic(g, x0, 1, schedule, cfg, key).t_value - 1.0) <= 0.2 ? 1 : 0;
    far += scoped_statistic(g, scaled, 1, schedule, cfg, key).t_value >= 2.0 ? 1 : 0;
  }
  // Oracle probability that chi2_d / d lands in [0.8, 1.2], by direct chi-square sampling.
  std::chi_squared_distribution<double> chi(static_cast<double>(d));
  int hits = 0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) hits += std::abs(chi(gen) / d - 1.0) <= 0.2 ? 1 : 0;
  const double p = static_cast<double>(hits) / m;
  const double frac = static_cast<double>(near_one) / n;
  CHECK(std::abs(frac - p) <= 4.0 * std::sqrt(p * (1 - p) / n));
  CHECK(far >= static_cast<int>(0.99 * n));
}

TEST_CASE("fixed noise mode is bit-reproducible and shares one draw") {
  const GmmScore m = three_component(4);
  const auto schedule = build_linear_schedule(1000, 1e-4, 0.02);
  TypicalityConfig cfg;
  cfg.noise_mode = NoiseMode::kFixed;
  cfg.seed = 77;
  const std::vector<double> x0{0.1, 0.2, 0.3, 0.4};
  const auto a = scoped_statistic(m, x0, 300, schedule, cfg, {Domain::kScore, 5});
  const auto b = scoped_statistic(m, x0, 300, schedule, cfg, {Domain::kScore, 5});
  CHECK(a.t_value == b.t_value);
  CHECK(a.curvature == b.curvature);
  CHECK(a.score_norm_sq == b.score_norm_sq);
  const NoiseLevel lv = level_at(schedule, 300);
  CHECK(corruption_noise(cfg, 4, lv, {Domain::kScore, 1}) == corruption_noise(cfg, 4, lv, {Domain::kCalibrate, 9}));
  cfg.noise_mode = NoiseMode::kFresh;
  CHECK(corruption_noise(cfg, 4, lv, {Domain::kScore, 1}) != corruption_noise(cfg, 4, lv, {Domain::kScore, 2}));
  CHECK(corruption_noise(cfg, 4, lv, {Domain::kScore, 1}) == corruption_noise(cfg, 4, lv, {Domain::kScore, 1}));
}

TEST_CASE("scoped_statistic counts one forward pass and K JVPs") {
  const GmmScore m = three_component(4);
  CountingScoreModel counted(m);
  TypicalityConfig cfg;
  cfg.num_probes = 3;
  const std::vector<double> x0{0.1, 0.2, 0.3, 0.4};
  const auto r = scoped_statistic(counted, x0, continuous_level(0.1), cfg, {});
  CHECK(counted.forwards() == 1);
  CHECK(counted.jvps() == 3);
  CHECK(r.probes_used == 3);
}

TEST_CASE("non-finite intermediates mark the sample as failed") {
  BrokenModel broken;
  const std::vector<double> x0{0.0, 0.0};
  const auto r = scoped_statistic(broken, x0, continuous_level(0.1), TypicalityConfig{}, {});
  CHECK_FALSE(r.ok);
}

TEST_CASE("step outside the schedule and dimension mismatch are rejected") {
  const GmmScore m = three_component(4);
  const auto schedule = build_linear_schedule(10, 1e-4, 0.02);
  const std::vector<double> x0{0.1, 0.2, 0.3, 0.4};
  CHECK_THROWS_AS(scoped_statistic(m, x0, 11, schedule, TypicalityConfig{}, {}), InputError);
  const std::vector<double> short_x{0.1};
  CHECK_THROWS_AS(scoped_statistic(m, short_x, 1, schedule, TypicalityConfig{}, {}), ConsistencyError);
}

TEST_CASE("batch scoring is independent of the worker count") {
  const GmmScore m = three_component(4);
  std::mt19937_64 gen(10);
  Dataset data(4, randn(gen, 4 * 300));
  const std::vector<NoiseLevel> levels{continuous_level(0.05), continuous_level(0.3)};
  TypicalityConfig cfg;
  cfg.num_probes = 2;
  std::ostringstream a, b;
  const auto serial = score_batch(m, data, levels, cfg, Domain::kScore, 1);
  const auto parallel = score_batch(m, data, levels, cfg, Domain::kScore, 5);
  write_typicality_csv(a, serial, 2);
  write_typicality_csv(b, parallel, 2);
  CHECK(a.str() == b.str());
  CHECK(serial.size() == 600);
}

TEST_CASE("typicality csv layout") {
  TypicalityScore s;
  s.level = NoiseLevel{300, 0.5, 0.8};
  s.score_norm_sq = 2.0;
  s.curvature = 4.0;
  s.sign = -1;
  s.t_value = -0.5;
  std::vector<TypicalityScore> v{s, s};
  std::ostringstream os;
  write_typicality_csv(os, v, 1);
  CHECK(os.str() ==
        "sample_index,timestep,score_norm_sq,curvature,sign,t_value\n0,300,2,4,-1,-0.5\n1,300,2,4,-1,-0.5\n");
}
