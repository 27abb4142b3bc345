#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scoped/calibration.hpp"
#include "scoped/dataset.hpp"
#include "scoped/score_model.hpp"

namespace scoped {

// P(ood > id) + 0.5 P(ood == id), via a sort. NaN ranks above every number.
double auroc(std::span<const double> id_scores, std::span<const double> ood_scores);
// Same with lexicographic (primary, secondary) keys.
double auroc(std::span<const std::pair<double, double>> id_keys,
             std::span<const std::pair<double, double>> ood_keys);
// Ranks anomaly scores by NLL, breaking ties at the NLL floor by tie_key.
double auroc(std::span<const AnomalyScore> id_scores, std::span<const AnomalyScore> ood_scores);

struct NfeCount {
  std::uint64_t forward = 0;
  std::uint64_t jvp = 0;
  bool operator==(const NfeCount&) const = default;
};

// Forward passes and JVPs per scored sample.
NfeCount nfe_account(Variant variant, const TypicalityConfig& cfg);

struct PairSpec {
  std::string id_name;
  std::string ood_name;
  const Dataset* id_data = nullptr;   // held-out ID split (not used for calibration)
  const Dataset* ood_data = nullptr;
  const ScoreModel* model = nullptr;
  const CalibrationArtifact* artifact = nullptr;
};

struct PairResult {
  std::string id_name;
  std::string ood_name;
  double auroc = 0.5;
  std::size_t n_id = 0;
  std::size_t n_ood = 0;
  std::size_t floor_ties = 0;  // scores resolved by the secondary key
  std::optional<double> auroc_no_sign;
};

struct AblationRow {
  NoiseLevel level;
  double auroc = 0.5;
};

struct AblationTable {
  std::string id_name;
  std::string ood_name;
  std::vector<AblationRow> rows;  // sorted by step
  AblationRow oracle;
};

struct EvalReport {
  std::vector<PairResult> pairs;
  NfeCount nfe;
  Variant variant = Variant::kSingle;
  std::uint64_t seed = 0;
  std::vector<AblationTable> ablations;
};

PairResult evaluate_pair(const PairSpec& spec, std::size_t workers);
EvalReport evaluate_pairs(std::span<const PairSpec> specs, std::size_t workers);

struct AblationInputs {
  const ScoreModel* model = nullptr;
  const Dataset* id_calibration = nullptr;
  const Dataset* id_eval = nullptr;
  const Dataset* ood = nullptr;
  std::uint64_t schedule_fp = 0;
};

// One single-level detector per level, AUROC each; rows sorted by step (sigma
// for continuous levels).
std::vector<AblationRow> ablate_timesteps(const AblationInputs& in, std::span<const NoiseLevel> levels,
                                          const TypicalityConfig& cfg, BandwidthRule bandwidth,
                                          std::size_t workers);

// Argmax AUROC, ties to the smaller step.
AblationRow oracle_timestep(std::span<const AblationRow> table);

// Rows are ID (training) datasets, columns evaluation datasets.
void write_matrix_csv(std::ostream& out, const EvalReport& report, std::span<const std::string> rows,
                      std::span<const std::string> cols);

}  // namespace scoped
