#include "scoped/schedule.hpp"

#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "scoped/bytes.hpp"
#include "scoped/errors.hpp"

namespace scoped {

std::string NoiseLevel::label() const {
  std::ostringstream os;
  if (continuous())
    os << 's' << std::setprecision(6) << sigma;
  else
    os << 't' << step;
  return os.str();
}

NoiseSchedule build_schedule(std::vector<double> betas) {
  if (betas.empty()) throw InputError("schedule needs at least one step");
  NoiseSchedule s;
  s.steps = static_cast<int>(betas.size());
  s.alpha_bars.reserve(betas.size());
  s.sigmas.reserve(betas.size());
  double prod = 1.0;
  for (double b : betas) {
    if (!std::isfinite(b) || b <= 0.0 || b >= 1.0)
      throw InputError("beta values must lie in (0, 1)");
    prod *= 1.0 - b;
    s.alpha_bars.push_back(prod);
    s.sigmas.push_back(std::sqrt(1.0 - prod));
  }
  s.betas = std::move(betas);
  return s;
}

NoiseSchedule build_linear_schedule(int steps, double beta_min, double beta_max) {
  if (steps < 1) throw InputError("schedule step count must be >= 1");
  if (!std::isfinite(beta_min) || !std::isfinite(beta_max) || beta_min <= 0.0 ||
      beta_max >= 1.0 || beta_min > beta_max)
    throw InputError("schedule bounds must satisfy 0 < beta_min <= beta_max < 1");
  std::vector<double> betas(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    betas[static_cast<std::size_t>(i)] = beta_min + frac * (beta_max - beta_min);
  }
  return build_schedule(std::move(betas));
}

NoiseLevel level_at(const NoiseSchedule& schedule, int t) {
  if (t < 1 || t > schedule.steps)
    throw InputError("timestep " + std::to_string(t) + " outside [1, " +
                     std::to_string(schedule.steps) + "]");
  return {t, std::sqrt(schedule.alpha_bar(t)), schedule.sigma(t)};
}

NoiseLevel continuous_level(double sigma) {
  if (!std::isfinite(sigma) || sigma <= 0.0) throw InputError("noise scale must be positive");
  return {0, 1.0, sigma};
}

std::vector<double> corrupt(std::span<const double> x0, const NoiseLevel& level,
                            std::span<const double> eps) {
  if (x0.size() != eps.size()) throw InputError("corrupt: noise dimension does not match data");
  std::vector<double> out(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i)
    out[i] = level.signal_scale * x0[i] + level.sigma * eps[i];
  return out;
}

std::vector<double> corrupt(std::span<const double> x0, int t, std::span<const double> eps,
                            const NoiseSchedule& schedule) {
  return corrupt(x0, level_at(schedule, t), eps);
}

std::vector<int> all_steps(const NoiseSchedule& schedule, int stride) {
  if (stride < 1) throw InputError("step stride must be >= 1");
  std::vector<int> out;
  for (int t = 1; t <= schedule.steps; t += stride) out.push_back(t);
  return out;
}

SnrCurve snr_curve(std::span<const double> points, std::size_t dim, const NoiseSchedule& schedule,
                   std::span<const int> timesteps) {
  if (dim == 0 || points.empty() || points.size() % dim != 0)
    throw InputError("snr_curve: dataset is empty or ragged");
  const std::size_t n = points.size() / dim;
  double energy = 0.0;
  for (double v : points) energy += v * v;
  const double mean_energy = energy / static_cast<double>(n);

  SnrCurve curve;
  for (int t : timesteps) {
    const NoiseLevel lv = level_at(schedule, t);
    const double clean = lv.signal_scale * lv.signal_scale * mean_energy;
    const double noise = lv.sigma * lv.sigma * static_cast<double>(dim);
    const double total = clean + noise;
    curve.timesteps.push_back(t);
    curve.fractions.push_back(total > 0.0 ? clean / total : 1.0);
  }
  return curve;
}

MidStepSelection select_mid_step(const SnrCurve& curve, double retention) {
  if (curve.timesteps.empty()) throw InputError("select_mid_step: empty curve");
  if (!(retention > 0.0 && retention < 1.0)) throw InputError("retention must lie in (0, 1)");
  std::optional<int> best;
  for (std::size_t i = 0; i < curve.timesteps.size(); ++i)
    if (curve.fractions[i] >= retention && (!best || curve.timesteps[i] > *best))
      best = curve.timesteps[i];
  if (best) return {*best, false};
  int earliest = curve.timesteps.front();
  for (int t : curve.timesteps) earliest = std::min(earliest, t);
  return {earliest, true};
}

double sigma_mode(const LogNormalSigmaPrior& prior) {
  if (!std::isfinite(prior.mu) || !(prior.sigma_log > 0.0))
    throw InputError("log-normal prior needs finite mu and sigma_log > 0");
  return std::exp(prior.mu - prior.sigma_log * prior.sigma_log);
}

void write_snr_csv(std::ostream& out, const SnrCurve& curve) {
  out << "t,fraction\n" << std::setprecision(17);
  for (std::size_t i = 0; i < curve.timesteps.size(); ++i)
    out << curve.timesteps[i] << ',' << curve.fractions[i] << '\n';
}

std::vector<std::uint8_t> schedule_bytes(const NoiseSchedule& schedule) {
  ByteWriter w;
  w.magic("DDPM");
  w.put<std::uint32_t>(static_cast<std::uint32_t>(schedule.steps));
  w.put_all<double>(schedule.betas);
  return w.take();
}

std::vector<std::uint8_t> prior_bytes(const LogNormalSigmaPrior& prior) {
  ByteWriter w;
  w.magic("LNSP");
  w.put(prior.mu);
  w.put(prior.sigma_log);
  return w.take();
}

}  // namespace scoped
