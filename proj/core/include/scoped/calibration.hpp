#pragma once

// Offline calibration of the typicality statistic and test-time anomaly scores.
//
// SCAL artifact files:
//   "SCAL" | u32 version | u32 variant (0 single, 1 two-step, 2 oracle) | u32 level count L
//   | L x (i32 step, f64 signal scale, f64 sigma)
//   | L x (f64 bandwidth, f64 log floor, u64 point count N, f64 points[N])
//   | u32 probes | u32 probe kind | f64 epsilon | u32 noise mode | u64 seed | u8 apply sign
//   | u64 schedule fingerprint | u64 model fingerprint
// Fingerprints are FNV-1a 64 over the serialized schedule and model bytes.
// KDE points are stored in calibration-sample order and aligned across levels.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scoped/dataset.hpp"
#include "scoped/kde.hpp"
#include "scoped/schedule.hpp"
#include "scoped/score_model.hpp"
#include "scoped/typicality.hpp"

namespace scoped {

inline constexpr std::uint32_t kArtifactFormatVersion = 1;

enum class Variant : std::uint32_t { kSingle = 0, kTwoStep = 1, kOracle = 2 };

Variant parse_variant(std::string_view name);
std::string_view to_string(Variant v);

struct CalibrationArtifact {
  Variant variant = Variant::kSingle;
  std::vector<NoiseLevel> levels;
  std::vector<KdeModel> kdes;  // one per level
  TypicalityConfig typicality;
  std::uint64_t schedule_fingerprint = 0;
  std::uint64_t model_fingerprint = 0;
  std::size_t excluded_samples = 0;  // not serialized
};

struct AnomalyScore {
  double value = 0.0;             // NLL in nats; max over levels for two-step
  std::vector<double> per_level;  // NLL at each artifact level
  std::vector<double> t_values;   // signed statistic at each artifact level
  // |T - median(ID T)| at the level attaining `value`; secondary ranking key
  // for scores tied at the NLL floor.
  double tie_key = 0.0;
  bool at_floor = false;
  bool ok = true;
  std::optional<bool> verdict;
};

std::uint64_t schedule_fingerprint(const NoiseSchedule& schedule);
std::uint64_t prior_fingerprint(const LogNormalSigmaPrior& prior);

struct CalibrationOptions {
  Variant variant = Variant::kSingle;
  BandwidthRule bandwidth = BandwidthRule::silverman();
  std::size_t workers = 1;
  // Abort when more than this fraction of (sample, level) values is non-finite.
  double max_failure_fraction = 0.01;
};

// Scores every ID sample at every level and fits one KDE per level on the signed
// statistic. Samples with any non-finite value are excluded from all levels.
CalibrationArtifact calibrate(const ScoreModel& model, const Dataset& id_data,
                              std::span<const NoiseLevel> levels, std::uint64_t schedule_fp,
                              const TypicalityConfig& cfg, const CalibrationOptions& options);

void check_compatible(const CalibrationArtifact& artifact, const ScoreModel& model,
                      std::optional<std::uint64_t> schedule_fp);

// Assembles the anomaly score from already computed statistics, one per level.
AnomalyScore combine_levels(const CalibrationArtifact& artifact, std::span<const TypicalityScore> stats);

AnomalyScore anomaly_score(const CalibrationArtifact& artifact, const ScoreModel& model,
                           std::span<const double> x0, SampleKey key);

std::vector<AnomalyScore> score_dataset(const CalibrationArtifact& artifact, const ScoreModel& model,
                                        const Dataset& data, std::size_t workers,
                                        Domain domain = Domain::kScore);

// Leave-one-out anomaly scores of the stored calibration samples: a held-in
// reference distribution for thresholds.
std::vector<double> id_reference_scores(const CalibrationArtifact& artifact);

// Empirical (1 - alpha) quantile; a score is anomalous iff it exceeds the cutoff.
double threshold_from_quantile(std::span<const double> id_scores, double alpha);

std::vector<std::uint8_t> encode_artifact(const CalibrationArtifact& artifact);
CalibrationArtifact decode_artifact(std::span<const std::uint8_t> bytes);
CalibrationArtifact load_artifact(const std::string& path);
void save_artifact(const CalibrationArtifact& artifact, const std::string& path);

}  // namespace scoped
