#include "scoped/typicality.hpp"

#include <bit>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "scoped/errors.hpp"
#include "scoped/parallel.hpp"

namespace scoped {
namespace {

std::uint64_t level_label(const NoiseLevel& level) {
  return level.continuous() ? std::bit_cast<std::uint64_t>(level.sigma)
                            : static_cast<std::uint64_t>(level.step);
}

Rng probe_rng(const TypicalityConfig& cfg, const NoiseLevel& level, SampleKey key) {
  return Rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::kProbe),
                                    static_cast<std::uint64_t>(key.domain), key.index, level_label(level)}));
}

}  // namespace

ProbeKind parse_probe_kind(std::string_view name) {
  if (name == "rademacher") return ProbeKind::kRademacher;
  if (name == "gaussian") return ProbeKind::kGaussian;
  throw InputError("unknown probe kind \"" + std::string(name) + "\"");
}

NoiseMode parse_noise_mode(std::string_view name) {
  if (name == "fresh") return NoiseMode::kFresh;
  if (name == "fixed") return NoiseMode::kFixed;
  throw InputError("unknown noise mode \"" + std::string(name) + "\"");
}

std::string_view to_string(ProbeKind k) { return k == ProbeKind::kRademacher ? "rademacher" : "gaussian"; }
std::string_view to_string(NoiseMode m) { return m == NoiseMode::kFresh ? "fresh" : "fixed"; }

void TypicalityConfig::validate() const {
  if (num_probes < 1) throw InputError("typicality: num_probes must be >= 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InputError("typicality: epsilon must be positive");
}

double hutchinson_trace(const ScoreModel& model, std::span<const double> x_t, const NoiseLevel& level,
                        const TypicalityConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t d = x_t.size();
  std::vector<double> v(d);
  double acc = 0.0;
  for (std::uint32_t k = 0; k < cfg.num_probes; ++k) {
    for (double& vi : v) vi = cfg.probe_kind == ProbeKind::kRademacher ? rng.rademacher() : rng.normal();
    const ScoreJvp r = model.jvp(x_t, level, v);
    double quad = 0.0;
    for (std::size_t i = 0; i < d; ++i) quad += v[i] * r.tangent[i];
    acc += quad;
  }
  return acc / static_cast<double>(cfg.num_probes);
}

double typicality_ratio(double score_norm_sq, double trace_est, double epsilon) {
  return score_norm_sq / (-trace_est + epsilon);
}

int sign_factor(std::span<const double> score) {
  double sum = 0.0;
  for (double s : score) sum += s;
  return sum < 0.0 ? -1 : 1;
}

std::vector<double> corruption_noise(const TypicalityConfig& cfg, std::size_t dim, const NoiseLevel& level,
                                     SampleKey key) {
  const std::uint64_t seed =
      cfg.noise_mode == NoiseMode::kFixed
          ? derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::kCorrupt)})
          : derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::kCorrupt),
                                   static_cast<std::uint64_t>(key.domain), key.index, level_label(level)});
  Rng rng(seed);
  std::vector<double> eps(dim);
  rng.fill_normal(eps);
  return eps;
}

TypicalityScore scoped_statistic(const ScoreModel& model, std::span<const double> x0,
                                 const NoiseLevel& level, const TypicalityConfig& cfg, SampleKey key) {
  cfg.validate();
  if (x0.size() != model.dim()) throw ConsistencyError("data point dimension does not match the model");
  const auto y0 = model.to_model_space(x0);
  const auto eps = corruption_noise(cfg, y0.size(), level, key);
  const auto xt = corrupt(y0, level, eps);

  TypicalityScore out;
  out.level = level;
  out.probes_used = cfg.num_probes;
  const auto score = model.evaluate(xt, level);
  for (double s : score) out.score_norm_sq += s * s;
  Rng rng = probe_rng(cfg, level, key);
  const double trace = hutchinson_trace(model, xt, level, cfg, rng);
  out.curvature = -trace;
  out.sign = cfg.apply_sign ? sign_factor(score) : 1;
  out.t_value = out.sign * typicality_ratio(out.score_norm_sq, trace, cfg.epsilon);
  out.ok = std::isfinite(out.score_norm_sq) && std::isfinite(out.curvature) && std::isfinite(out.t_value);
  return out;
}

TypicalityScore scoped_statistic(const ScoreModel& model, std::span<const double> x0, int t,
                                 const NoiseSchedule& schedule, const TypicalityConfig& cfg,
                                 SampleKey key) {
  return scoped_statistic(model, x0, level_at(schedule, t), cfg, key);
}

std::vector<TypicalityScore> score_batch(const ScoreModel& model, const Dataset& data,
                                         std::span<const NoiseLevel> levels, const TypicalityConfig& cfg,
                                         Domain domain, std::size_t workers) {
  cfg.validate();
  if (!data.empty() && data.dim != model.dim())
    throw ConsistencyError("dataset dimension " + std::to_string(data.dim) + " does not match model dimension " +
                           std::to_string(model.dim()));
  const std::size_t per = levels.size();
  std::vector<TypicalityScore> out(data.rows() * per);
  parallel_for(data.rows(), workers, [&](std::size_t i) {
    for (std::size_t j = 0; j < per; ++j)
      out[i * per + j] = scoped_statistic(model, data.row(i), levels[j], cfg, {domain, i});
  });
  return out;
}

void write_typicality_csv(std::ostream& out, std::span<const TypicalityScore> scores,
                          std::size_t levels_per_sample) {
  out << "sample_index,timestep,score_norm_sq,curvature,sign,t_value\n" << std::setprecision(17);
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const auto& s = scores[k];
    out << k / levels_per_sample << ',';
    if (s.level.continuous())
      out << s.level.sigma;
    else
      out << s.level.step;
    out << ',' << s.score_norm_sq << ',' << s.curvature
        << ',' << s.sign << ',' << s.t_value << '\n';
  }
}

}  // namespace scoped
