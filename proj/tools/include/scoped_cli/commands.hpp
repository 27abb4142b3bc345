#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "scoped/calibration.hpp"
#include "scoped/dataset.hpp"
#include "scoped/score_model.hpp"
#include "scoped_cli/config.hpp"

namespace scoped::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitConsistency = 3;
inline constexpr int kExitNumeric = 4;

// Parses and runs one command line (args excludes the program name). Errors are
// reported on `err` and mapped to exit codes; nothing escapes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Noise levels a config calibrates at. `model_space_points` feeds the SNR scan
// when the selection rule is "snr".
std::vector<NoiseLevel> resolve_levels(const ProjectConfig& cfg, const Dataset& model_space_points);

// Ablation sweep levels from the eval block.
std::vector<NoiseLevel> ablation_levels(const ProjectConfig& cfg);

// Maps every row of `data` through the model's standardization.
Dataset to_model_space(const ScoreModel& model, const Dataset& data);

}  // namespace scoped::cli
