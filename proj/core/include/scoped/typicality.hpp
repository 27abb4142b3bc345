#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "scoped/dataset.hpp"
#include "scoped/rng.hpp"
#include "scoped/schedule.hpp"
#include "scoped/score_model.hpp"

namespace scoped {

enum class ProbeKind : std::uint32_t { kRademacher = 0, kGaussian = 1 };

// kFresh draws a corruption noise vector per (sample, noise level); kFixed shares
// one vector across every sample and level of a run.
enum class NoiseMode : std::uint32_t { kFresh = 0, kFixed = 1 };

ProbeKind parse_probe_kind(std::string_view name);
NoiseMode parse_noise_mode(std::string_view name);
std::string_view to_string(ProbeKind k);
std::string_view to_string(NoiseMode m);

struct TypicalityConfig {
  std::uint32_t num_probes = 1;
  ProbeKind probe_kind = ProbeKind::kRademacher;
  double epsilon = 1e-12;
  NoiseMode noise_mode = NoiseMode::kFresh;
  std::uint64_t seed = 0;
  // Multiply T by sign(sum_i s_i). Disabled only for the sign ablation.
  bool apply_sign = true;

  void validate() const;
  bool operator==(const TypicalityConfig&) const = default;
};

struct TypicalityScore {
  double t_value = 0.0;        // sign * score_norm_sq / (curvature + epsilon)
  double score_norm_sq = 0.0;  // ||s||^2
  double curvature = 0.0;      // kappa = -Tr(grad s), Hutchinson estimate
  int sign = 1;
  NoiseLevel level;
  std::uint32_t probes_used = 0;
  bool ok = true;  // false when an intermediate value was non-finite
};

// Identifies a scored sample so its random streams are fixed by (seed, domain,
// index, level) regardless of worker count or scheduling order.
struct SampleKey {
  Domain domain = Domain::kScore;
  std::uint64_t index = 0;
};

// (1/K) sum_k v_k^T J v_k with E[v v^T] = I, one JVP per probe.
double hutchinson_trace(const ScoreModel& model, std::span<const double> x_t, const NoiseLevel& level,
                        const TypicalityConfig& cfg, Rng& rng);

// score_norm_sq / (-trace_est + epsilon). Negative curvature passes through.
double typicality_ratio(double score_norm_sq, double trace_est, double epsilon);

// sign(sum_i score_i); +1 when the sum is exactly zero.
int sign_factor(std::span<const double> score);

// Corrupts x0 (raw coordinates) to the level, then assembles the signed statistic
// from one forward pass and cfg.num_probes JVPs.
TypicalityScore scoped_statistic(const ScoreModel& model, std::span<const double> x0,
                                 const NoiseLevel& level, const TypicalityConfig& cfg, SampleKey key);
TypicalityScore scoped_statistic(const ScoreModel& model, std::span<const double> x0, int t,
                                 const NoiseSchedule& schedule, const TypicalityConfig& cfg,
                                 SampleKey key);

// The corruption noise scoped_statistic would use for this sample and level.
std::vector<double> corruption_noise(const TypicalityConfig& cfg, std::size_t dim, const NoiseLevel& level,
                                     SampleKey key);

// Statistics for every (sample, level) pair, sample-major: result[i * L + j].
std::vector<TypicalityScore> score_batch(const ScoreModel& model, const Dataset& data,
                                         std::span<const NoiseLevel> levels, const TypicalityConfig& cfg,
                                         Domain domain, std::size_t workers);

// sample_index,timestep,score_norm_sq,curvature,sign,t_value
void write_typicality_csv(std::ostream& out, std::span<const TypicalityScore> scores,
                          std::size_t levels_per_sample);

}  // namespace scoped
