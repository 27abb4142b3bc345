#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "scoped/analytic.hpp"
#include "scoped/errors.hpp"
#include "scoped/evaluation.hpp"

using namespace scoped;

namespace {

std::vector<double> randn(std::mt19937_64& gen, std::size_t n, double scale = 1.0, double shift = 0.0) {
  std::normal_distribution<double> d(shift, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

// Values on a coarse grid so ties are common.
std::vector<double> tied(std::mt19937_64& gen, std::size_t n, double shift) {
  auto v = randn(gen, n, 1.0, shift);
  for (auto& x : v) x = std::round(x * 4.0) / 4.0;
  return v;
}

Dataset gaussian_data(std::size_t n, std::size_t d, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  return Dataset(d, randn(gen, n * d, scale));
}

}  // namespace

TEST_CASE("auroc examples") {
  const std::vector<double> id{0.0, 1.0}, ood{2.0, 3.0};
  CHECK(auroc(id, ood) == 1.0);
  CHECK(auroc(ood, id) == 0.0);
  CHECK(auroc(id, id) == 0.5);
  const std::vector<double> empty;
  CHECK_THROWS_AS(auroc(empty, ood), InputError);
  CHECK_THROWS_AS(auroc(id, empty), InputError);
}

TEST_CASE("auroc matches the pairwise oracle, with and without ties") {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 50; ++trial) {
    const bool with_ties = trial % 2 == 0;
    const auto id = with_ties ? tied(gen, 200, 0.0) : randn(gen, 200);
    const auto ood = with_ties ? tied(gen, 200, 0.3 * (trial % 5)) : randn(gen, 200, 1.0, 0.1 * trial);
    CHECK(std::abs(auroc(id, ood) - oracle::brute_auroc(id, ood)) <= 1e-12);
  }
}

TEST_CASE("auroc on large batches agrees with the pairwise count") {
  std::mt19937_64 gen(2);
  const auto id = tied(gen, 12000, 0.0);
  const auto ood = tied(gen, 11000, 0.4);
  CHECK(std::abs(auroc(id, ood) - oracle::brute_auroc(id, ood)) <= 1e-12);
}

TEST_CASE("auroc: exact swap antisymmetry and monotone invariance") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = tied(gen, 50 + trial * 7, 0.0);
    const auto b = tied(gen, 80 + trial * 3, 0.2);
    CHECK(auroc(a, b) + auroc(b, a) == 1.0);
    auto ta = a, tb = b;
    for (auto& x : ta) x = std::exp(x) * 3.0 + 1.0;
    for (auto& x : tb) x = std::exp(x) * 3.0 + 1.0;
    CHECK(auroc(ta, tb) == auroc(a, b));
    for (auto& x : ta) x = x * x * x;
    for (auto& x : tb) x = x * x * x;
    CHECK(auroc(ta, tb) == auroc(a, b));
  }
}

TEST_CASE("NaN scores rank above every number") {
  const std::vector<double> id{0.0, 1.0};
  const std::vector<double> ood{NAN, 0.5};
  CHECK(auroc(id, ood) == oracle::brute_auroc(id, ood));
  CHECK(auroc(id, ood) == 0.75);
  const std::vector<double> both{NAN};
  CHECK(auroc(both, both) == 0.5);
}

TEST_CASE("keyed auroc breaks primary ties by the secondary key") {
  const std::vector<std::pair<double, double>> id{{5.0, 1.0}, {5.0, 2.0}};
  const std::vector<std::pair<double, double>> ood{{5.0, 3.0}, {5.0, 0.5}};
  // ood (5,3) beats both; ood (5,0.5) beats neither.
  CHECK(auroc(std::span(id), std::span(ood)) == 0.5);
  const std::vector<std::pair<double, double>> ood_far{{5.0, 9.0}, {5.0, 8.0}};
  CHECK(auroc(std::span(id), std::span(ood_far)) == 1.0);
}

TEST_CASE("NFE accounting") {
  TypicalityConfig cfg;
  CHECK(nfe_account(Variant::kSingle, cfg) == NfeCount{1, 1});
  CHECK(nfe_account(Variant::kTwoStep, cfg) == NfeCount{2, 2});
  CHECK(nfe_account(Variant::kOracle, cfg) == NfeCount{1, 1});
  cfg.num_probes = 4;
  CHECK(nfe_account(Variant::kTwoStep, cfg) == NfeCount{2, 8});
  CHECK(nfe_account(Variant::kSingle, cfg) == NfeCount{1, 4});
}

TEST_CASE("evaluate_pairs: empty, separated, self split, dimension mismatch, counted NFE") {
  CHECK(evaluate_pairs({}, 1).pairs.empty());

  const std::size_t d = 16;
  const auto schedule = build_linear_schedule(1000, 1e-4, 0.02);
  const AnalyticGaussianScore g(std::vector<double>(d, 0.0), 1.0);
  const std::vector<NoiseLevel> two{level_at(schedule, 1), level_at(schedule, 300)};
  CalibrationOptions opts;
  opts.variant = Variant::kTwoStep;
  const Dataset cal = gaussian_data(2000, d, 1);
  const auto art = calibrate(g, cal, two, schedule_fingerprint(schedule), TypicalityConfig{}, opts);

  const Dataset held = gaussian_data(2000, d, 2);
  const Dataset half_a = slice(held, 0, 1000);
  const Dataset half_b = slice(held, 1000, 2000);
  Dataset far = gaussian_data(2000, d, 3);
  for (auto& v : far.values) v += 20.0;

  CountingScoreModel counted(g);
  const std::vector<PairSpec> specs{{"A", "A", &half_a, &half_b, &counted, &art},
                                    {"A", "B", &held, &far, &counted, &art}};
  const auto report = evaluate_pairs(specs, 1);
  REQUIRE(report.pairs.size() == 2);
  CHECK(report.pairs[0].auroc >= 0.45);
  CHECK(report.pairs[0].auroc <= 0.55);
  CHECK(report.pairs[1].auroc == 1.0);
  CHECK(report.nfe == NfeCount{2, 2});
  const std::uint64_t scored = 1000 + 1000 + 2000 + 2000;
  CHECK(counted.forwards() == 2 * scored);
  CHECK(counted.jvps() == 2 * scored);
  for (const auto& p : report.pairs) {
    CHECK(p.auroc >= 0.0);
    CHECK(p.auroc <= 1.0);
  }

  const Dataset wrong = gaussian_data(10, d + 1, 4);
  const PairSpec bad{"A", "C", &held, &wrong, &g, &art};
  CHECK_THROWS_AS(evaluate_pair(bad, 1), ConsistencyError);

  std::ostringstream os;
  const std::vector<std::string> rows{"A"}, cols{"A", "B"};
  write_matrix_csv(os, report, rows, cols);
  std::ostringstream want;
  want << "train,A,B\nA," << std::fixed;
  want.precision(6);
  want << report.pairs[0].auroc << ',' << report.pairs[1].auroc << '\n';
  CHECK(os.str() == want.str());
}

TEST_CASE("single-level ablation: scaled gaussian separates at every step, same distribution does not") {
  const std::size_t d = 16;
  const auto schedule = build_linear_schedule(1000, 1e-4, 0.02);
  const AnalyticGaussianScore g(std::vector<double>(d, 0.0), 1.0);
  const Dataset cal = gaussian_data(1000, d, 5);
  const Dataset held = gaussian_data(1000, d, 6);
  const Dataset scaled = gaussian_data(1000, d, 7, 5.0);
  const Dataset same = gaussian_data(1000, d, 8);
  // Deliberately unsorted input order.
  const std::vector<NoiseLevel> levels{level_at(schedule, 300), level_at(schedule, 1), level_at(schedule, 100)};
  const auto fp = schedule_fingerprint(schedule);

  AblationInputs in{&g, &cal, &held, &scaled, fp};
  const auto table = ablate_timesteps(in, levels, TypicalityConfig{}, BandwidthRule::silverman(), 1);
  REQUIRE(table.size() == 3);
  CHECK(table[0].level.step == 1);
  CHECK(table[1].level.step == 100);
  CHECK(table[2].level.step == 300);
  for (const auto& row : table) CHECK(row.auroc >= 0.95);
  const auto best = oracle_timestep(table);
  for (const auto& row : table) CHECK(best.auroc >= row.auroc);

  in.ood = &same;
  for (const auto& row : ablate_timesteps(in, levels, TypicalityConfig{}, BandwidthRule::silverman(), 1)) {
    CHECK(row.auroc >= 0.4);
    CHECK(row.auroc <= 0.6);
  }
  CHECK(ablate_timesteps(in, std::span(levels).first(1), TypicalityConfig{}, BandwidthRule::silverman(), 1).size() == 1);
}

TEST_CASE("oracle timestep selection") {
  const NoiseLevel t1{1, 1.0, 0.01}, t300{300, 0.8, 0.6};
  const std::vector<AblationRow> a{{t1, 0.7}, {t300, 0.9}};
  CHECK(oracle_timestep(a).level.step == 300);
  CHECK(oracle_timestep(a).auroc == 0.9);
  const std::vector<AblationRow> tie{{t300, 0.9}, {t1, 0.9}};
  CHECK(oracle_timestep(tie).level.step == 1);
  CHECK_THROWS_AS(oracle_timestep({}), InputError);

  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.4, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<AblationRow> rows;
    for (int t = 1; t <= 9; ++t) rows.push_back({NoiseLevel{t * 50, 1.0, 0.1}, std::round(u(gen) * 20) / 20});
    std::size_t scan = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i].auroc > rows[scan].auroc) scan = i;
    const auto best = oracle_timestep(rows);
    REQUIRE(best.auroc == rows[scan].auroc);
    REQUIRE(best.level.step == rows[scan].level.step);
  }
}
