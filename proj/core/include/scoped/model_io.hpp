#pragma once

// SCPD model files.
//
//   "SCPD" | u32 version | u32 kind (1 mlp, 2 gaussian, 3 gmm)
//   | u32 parameterization tag | u64 dim
//   | u32 layer count L | u32 widths[L] | u32 activation id | u32 embedding frequencies
//   | f64 standardization mean[dim] | f64 standardization std[dim]
//   | u64 parameter count P | f64 parameters[P]
//
// All integers and floats little-endian. MLP widths list every layer from input
// to output and parameters are (W row-major, b) per layer in order. The Gaussian
// oracle stores P = dim + 1 parameters (mean, variance) with L = 0; the mixture
// stores L = 1 with widths = [K] and parameters (weights[K], means[K*dim],
// variances[K]).

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "scoped/score_model.hpp"

namespace scoped {

class MlpDenoiser;
class AnalyticGaussianScore;
class GmmScore;

inline constexpr std::uint32_t kModelFormatVersion = 1;

enum class ModelKind : std::uint32_t { kMlp = 1, kGaussian = 2, kGmm = 3 };

std::vector<std::uint8_t> encode_mlp(const MlpDenoiser& model);
std::vector<std::uint8_t> encode_gaussian(const AnalyticGaussianScore& model);
std::vector<std::uint8_t> encode_gmm(const GmmScore& model);

std::unique_ptr<ScoreModel> decode_model(std::span<const std::uint8_t> bytes);

std::unique_ptr<ScoreModel> load_model(const std::string& path);
void save_model(const ScoreModel& model, const std::string& path);

}  // namespace scoped
