#include "scoped/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scoped/bytes.hpp"
#include "scoped/errors.hpp"
#include "scoped/parallel.hpp"

namespace scoped {

Variant parse_variant(std::string_view name) {
  if (name == "single") return Variant::kSingle;
  if (name == "two-step") return Variant::kTwoStep;
  if (name == "oracle") return Variant::kOracle;
  throw InputError("unknown variant \"" + std::string(name) + "\"");
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kSingle: return "single";
    case Variant::kTwoStep: return "two-step";
    case Variant::kOracle: return "oracle";
  }
  return "?";
}

std::uint64_t schedule_fingerprint(const NoiseSchedule& schedule) { return fnv1a64(schedule_bytes(schedule)); }
std::uint64_t prior_fingerprint(const LogNormalSigmaPrior& prior) { return fnv1a64(prior_bytes(prior)); }

CalibrationArtifact calibrate(const ScoreModel& model, const Dataset& id_data,
                              std::span<const NoiseLevel> levels, std::uint64_t schedule_fp,
                              const TypicalityConfig& cfg, const CalibrationOptions& options) {
  if (id_data.empty()) throw InputError("calibrate: empty in-distribution dataset");
  if (levels.empty()) throw InputError("calibrate: no noise levels");
  if (options.variant == Variant::kTwoStep && levels.size() != 2)
    throw InputError("calibrate: the two-step variant needs exactly two levels");
  if (options.variant != Variant::kTwoStep && levels.size() != 1)
    throw InputError("calibrate: single and oracle variants take exactly one level");

  const auto stats = score_batch(model, id_data, levels, cfg, Domain::kCalibrate, options.workers);
  const std::size_t per = levels.size();
  const std::size_t n = id_data.rows();
  std::size_t bad_values = 0;
  std::vector<bool> keep(n, true);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < per; ++j)
      if (!stats[i * per + j].ok) {
        ++bad_values;
        keep[i] = false;
      }
  if (static_cast<double>(bad_values) > options.max_failure_fraction * static_cast<double>(stats.size())) {
    std::ostringstream msg;
    msg << "calibrate: " << bad_values << " of " << stats.size() << " statistics are non-finite";
    throw NumericError(msg.str());
  }

  CalibrationArtifact art;
  art.variant = options.variant;
  art.levels.assign(levels.begin(), levels.end());
  art.typicality = cfg;
  art.schedule_fingerprint = schedule_fp;
  art.model_fingerprint = model_fingerprint(model);
  art.excluded_samples = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), false));
  for (std::size_t j = 0; j < per; ++j) {
    std::vector<double> values;
    for (std::size_t i = 0; i < n; ++i)
      if (keep[i]) values.push_back(stats[i * per + j].t_value);
    if (values.size() < 2) throw NumericError("calibrate: fewer than 2 usable samples");
    art.kdes.push_back(fit_kde(values, options.bandwidth));
  }
  return art;
}

void check_compatible(const CalibrationArtifact& artifact, const ScoreModel& model,
                      std::optional<std::uint64_t> schedule_fp) {
  if (artifact.model_fingerprint != model_fingerprint(model))
    throw ConsistencyError("artifact was calibrated against a different model");
  if (schedule_fp && *schedule_fp != artifact.schedule_fingerprint)
    throw ConsistencyError("artifact was calibrated against a different noise schedule");
}

AnomalyScore combine_levels(const CalibrationArtifact& artifact, std::span<const TypicalityScore> stats) {
  AnomalyScore out;
  std::size_t best = 0;
  for (std::size_t j = 0; j < stats.size(); ++j) {
    const double nll = kde_nll(artifact.kdes[j], stats[j].t_value);
    out.per_level.push_back(nll);
    out.t_values.push_back(stats[j].t_value);
    out.ok = out.ok && stats[j].ok;
    if (j == 0 || nll > out.per_level[best]) best = j;
  }
  out.value = out.per_level[best];
  out.at_floor = out.value >= -artifact.kdes[best].log_floor();
  out.tie_key = std::isfinite(stats[best].t_value)
                    ? std::abs(stats[best].t_value - artifact.kdes[best].median())
                    : std::numeric_limits<double>::infinity();
  return out;
}

AnomalyScore anomaly_score(const CalibrationArtifact& artifact, const ScoreModel& model,
                           std::span<const double> x0, SampleKey key) {
  std::vector<TypicalityScore> stats;
  for (const auto& level : artifact.levels)
    stats.push_back(scoped_statistic(model, x0, level, artifact.typicality, key));
  return combine_levels(artifact, stats);
}

std::vector<AnomalyScore> score_dataset(const CalibrationArtifact& artifact, const ScoreModel& model,
                                        const Dataset& data, std::size_t workers, Domain domain) {
  if (!data.empty() && data.dim != model.dim())
    throw ConsistencyError("dataset dimension " + std::to_string(data.dim) + " does not match model dimension " +
                           std::to_string(model.dim()));
  std::vector<AnomalyScore> out(data.rows());
  parallel_for(data.rows(), workers,
               [&](std::size_t i) { out[i] = anomaly_score(artifact, model, data.row(i), {domain, i}); });
  return out;
}

std::vector<double> id_reference_scores(const CalibrationArtifact& artifact) {
  if (artifact.kdes.empty()) throw InputError("artifact has no KDEs");
  const std::size_t n = artifact.kdes.front().points().size();
  std::vector<double> out(n, -std::numeric_limits<double>::infinity());
  for (const auto& kde : artifact.kdes) {
    if (kde.points().size() != n) throw ConsistencyError("artifact KDEs are not sample-aligned");
    for (std::size_t i = 0; i < n; ++i) {
      const double nll = std::min(-kde.log_density_excluding(kde.points()[i], i), -kde.log_floor());
      out[i] = std::max(out[i], nll);
    }
  }
  return out;
}

double threshold_from_quantile(std::span<const double> id_scores, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  return empirical_quantile(id_scores, 1.0 - alpha);
}

std::vector<std::uint8_t> encode_artifact(const CalibrationArtifact& artifact) {
  ByteWriter w;
  w.magic("SCAL");
  w.put<std::uint32_t>(kArtifactFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(artifact.variant));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(artifact.levels.size()));
  for (const auto& lv : artifact.levels) {
    w.put<std::int32_t>(lv.step);
    w.put(lv.signal_scale);
    w.put(lv.sigma);
  }
  for (const auto& kde : artifact.kdes) {
    w.put(kde.bandwidth());
    w.put(kde.log_floor());
    w.put<std::uint64_t>(kde.points().size());
    w.put_all<double>(kde.points());
  }
  const auto& t = artifact.typicality;
  w.put<std::uint32_t>(t.num_probes);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(t.probe_kind));
  w.put(t.epsilon);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(t.noise_mode));
  w.put<std::uint64_t>(t.seed);
  w.put<std::uint8_t>(t.apply_sign ? 1 : 0);
  w.put<std::uint64_t>(artifact.schedule_fingerprint);
  w.put<std::uint64_t>(artifact.model_fingerprint);
  return w.take();
}

CalibrationArtifact decode_artifact(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "artifact file");
  r.expect_magic("SCAL");
  const auto version = r.get<std::uint32_t>();
  if (version != kArtifactFormatVersion)
    throw InputError("artifact file: unsupported version " + std::to_string(version));
  CalibrationArtifact art;
  const auto variant = r.get<std::uint32_t>();
  if (variant > 2) throw InputError("artifact file: unknown variant");
  art.variant = static_cast<Variant>(variant);
  const auto count = r.get<std::uint32_t>();
  if (count == 0 || count > 1024) throw InputError("artifact file: implausible level count");
  for (std::uint32_t j = 0; j < count; ++j) {
    NoiseLevel lv;
    lv.step = r.get<std::int32_t>();
    lv.signal_scale = r.get<double>();
    lv.sigma = r.get<double>();
    art.levels.push_back(lv);
  }
  for (std::uint32_t j = 0; j < count; ++j) {
    const double bandwidth = r.get<double>();
    const double log_floor = r.get<double>();
    const auto n = r.get<std::uint64_t>();
    art.kdes.emplace_back(r.get_n<double>(n), bandwidth, log_floor);
  }
  auto& t = art.typicality;
  t.num_probes = r.get<std::uint32_t>();
  const auto probe = r.get<std::uint32_t>();
  t.epsilon = r.get<double>();
  const auto mode = r.get<std::uint32_t>();
  if (probe > 1 || mode > 1) throw InputError("artifact file: unknown probe kind or noise mode");
  t.probe_kind = static_cast<ProbeKind>(probe);
  t.noise_mode = static_cast<NoiseMode>(mode);
  t.seed = r.get<std::uint64_t>();
  t.apply_sign = r.get<std::uint8_t>() != 0;
  t.validate();
  art.schedule_fingerprint = r.get<std::uint64_t>();
  art.model_fingerprint = r.get<std::uint64_t>();
  if (r.remaining() != 0) throw InputError("artifact file: trailing bytes");
  return art;
}

CalibrationArtifact load_artifact(const std::string& path) { return decode_artifact(read_file_bytes(path)); }

void save_artifact(const CalibrationArtifact& artifact, const std::string& path) {
  write_file_bytes(path, encode_artifact(artifact));
}

}  // namespace scoped
