#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "scoped/calibration.hpp"
#include "scoped/datagen.hpp"
#include "scoped/dsm.hpp"
#include "scoped/kde.hpp"
#include "scoped/mlp.hpp"
#include "scoped/schedule.hpp"
#include "scoped/typicality.hpp"

namespace scoped::cli {

struct DiscreteScheduleBlock {
  int steps = 1000;
  double beta_min = 1e-4;
  double beta_max = 0.02;
};

struct CalibrationBlock {
  Variant variant = Variant::kTwoStep;
  std::string selection = "fixed";  // "fixed" or "snr"
  std::vector<int> timesteps{1, 300};
  std::vector<double> sigmas;       // continuous mode; empty means the prior's mode
  double retention = 0.95;
  int early_step = 1;
  BandwidthRule bandwidth = BandwidthRule::silverman();
};

struct EvalBlock {
  double alpha = 0.05;
  double split = 0.5;
  std::vector<int> ablate_timesteps{1, 50, 100, 200, 300, 400, 500};
  std::vector<double> ablate_sigmas;
};

// Every pipeline choice, loaded from one JSON file plus --set overrides.
struct ProjectConfig {
  std::uint64_t seed = 0;
  std::optional<DiscreteScheduleBlock> discrete;
  std::optional<LogNormalSigmaPrior> continuous;
  MlpSpec model;
  DsmTrainConfig train;
  TypicalityConfig typicality;
  CalibrationBlock calibration;
  EvalBlock eval;
  nlohmann::json snapshot;  // effective config after overrides

  bool is_continuous() const { return continuous.has_value(); }
  NoiseSchedule schedule() const;
  std::uint64_t schedule_fingerprint() const;
};

// Applies "a.b.c=value" to a JSON object. The value is parsed as JSON when it
// parses, else kept as a string. A null value removes the key.
void apply_override(nlohmann::json& root, const std::string& assignment);

ProjectConfig parse_config(const nlohmann::json& root);
ProjectConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

DatasetSpec parse_dataset_spec(const nlohmann::json& j);

}  // namespace scoped::cli
