#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scoped/dataset.hpp"
#include "scoped/mlp.hpp"
#include "scoped/schedule.hpp"

namespace scoped {

enum class NoiseSampling : std::uint32_t {
  kUniformSteps = 0,  // t ~ U{1..T} on a discrete schedule
  kLogNormal = 1,     // log sigma ~ N(mu, sigma_log^2), signal scale 1
};

// w(sigma) multiplying ||s + eps/sigma||^2.
enum class WeightRule : std::uint32_t {
  kSigmaSquared = 0,  // w = sigma^2, the noise-prediction loss
  kEdm = 1,           // w = sigma^2 (sigma^2 + s^2) / s^2, unit weight on the preconditioned output
  kUnit = 2,
};

NoiseSampling parse_noise_sampling(std::string_view name);
WeightRule parse_weight_rule(std::string_view name);

struct DsmTrainConfig {
  std::uint32_t epochs = 100;
  std::uint32_t batch_size = 128;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  NoiseSampling sampling = NoiseSampling::kUniformSteps;
  WeightRule weight = WeightRule::kSigmaSquared;
  LogNormalSigmaPrior prior;
  std::uint64_t seed = 0;
  bool standardize = true;
};

struct TrainResult {
  MlpDenoiser model;
  std::vector<double> loss_trace;  // mean weighted DSM loss per epoch
};

double dsm_weight(WeightRule rule, const NoiseLevel& level);

// `schedule` is required for kUniformSteps and ignored otherwise.
TrainResult train_dsm(MlpDenoiser model, const Dataset& data, const NoiseSchedule* schedule,
                      const DsmTrainConfig& cfg);

// One frozen Monte Carlo draw for evaluating the DSM objective.
struct DsmDraw {
  NoiseLevel level;
  std::vector<double> eps;
};

// mean_i w_i ||s(x_t,i) + eps_i / sigma_i||^2 with x_t,i = s_i x0_i + sigma_i eps_i;
// clean points are given in model space.
double dsm_loss(const ScoreModel& model, const Dataset& clean, std::span<const DsmDraw> draws,
                WeightRule rule);

}  // namespace scoped
