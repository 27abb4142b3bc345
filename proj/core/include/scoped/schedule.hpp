#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scoped {

// Discrete variance-preserving schedule. Step indices are 1-based: step t
// corresponds to element t-1 of each array.
struct NoiseSchedule {
  int steps = 0;
  std::vector<double> betas;
  std::vector<double> alpha_bars;
  std::vector<double> sigmas;

  double alpha_bar(int t) const { return alpha_bars.at(static_cast<std::size_t>(t - 1)); }
  double sigma(int t) const { return sigmas.at(static_cast<std::size_t>(t - 1)); }
};

struct LogNormalSigmaPrior {
  double mu = -1.2;
  double sigma_log = 1.2;
};

// A noise level as seen by a score model: x_t = signal_scale * x0 + sigma * eps.
// Discrete steps carry signal_scale = sqrt(alpha_bar_t); a raw continuous sigma is
// a pseudo-step with step = 0 and signal_scale = 1.
struct NoiseLevel {
  int step = 0;
  double signal_scale = 1.0;
  double sigma = 1.0;

  bool continuous() const { return step == 0; }
  // Column/CSV label: "t300" for discrete steps, "s0.0714" for raw sigmas.
  std::string label() const;
  bool operator==(const NoiseLevel&) const = default;
};

// Noise-free level; analytic models evaluate their clean density here.
inline constexpr NoiseLevel kCleanLevel{0, 1.0, 0.0};

struct SnrCurve {
  std::vector<int> timesteps;
  std::vector<double> fractions;
};

struct MidStepSelection {
  int step = 0;
  bool fallback = false;  // no step met the retention target
};

NoiseSchedule build_linear_schedule(int steps, double beta_min, double beta_max);
// Arbitrary beta sequence; validates each beta in (0, 1).
NoiseSchedule build_schedule(std::vector<double> betas);

NoiseLevel level_at(const NoiseSchedule& schedule, int t);
NoiseLevel continuous_level(double sigma);

// sqrt(alpha_bar_t) * x0 + sigma_t * eps.
std::vector<double> corrupt(std::span<const double> x0, int t, std::span<const double> eps,
                            const NoiseSchedule& schedule);
std::vector<double> corrupt(std::span<const double> x0, const NoiseLevel& level,
                            std::span<const double> eps);

// Signal fraction E_clean / (E_clean + E_noise) at each step. `points` is a
// row-major batch of `dim`-dimensional clean samples.
SnrCurve snr_curve(std::span<const double> points, std::size_t dim, const NoiseSchedule& schedule,
                   std::span<const int> timesteps);
// Every step 1..T with the given stride (stride 1 gives the full curve).
std::vector<int> all_steps(const NoiseSchedule& schedule, int stride = 1);

MidStepSelection select_mid_step(const SnrCurve& curve, double retention = 0.95);

double sigma_mode(const LogNormalSigmaPrior& prior);

void write_snr_csv(std::ostream& out, const SnrCurve& curve);

// Canonical byte encodings used for fingerprints.
std::vector<std::uint8_t> schedule_bytes(const NoiseSchedule& schedule);
std::vector<std::uint8_t> prior_bytes(const LogNormalSigmaPrior& prior);

}  // namespace scoped
