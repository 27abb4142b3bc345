#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scoped/dual.hpp"
#include "scoped/schedule.hpp"
#include "scoped/score_model.hpp"

namespace scoped {

enum class Activation : std::uint32_t { kSilu = 0, kTanh = 1, kRelu = 2 };
enum class Parameterization : std::uint32_t { kEps = 0, kDenoiser = 1 };

Activation parse_activation(std::string_view name);
Parameterization parse_parameterization(std::string_view name);
std::string_view to_string(Activation a);
std::string_view to_string(Parameterization p);

struct MlpSpec {
  std::vector<std::uint32_t> hidden{128, 128, 128};
  Activation activation = Activation::kSilu;
  Parameterization parameterization = Parameterization::kEps;
  // Number of sinusoidal frequencies in the noise-level embedding (sin and cos each).
  std::uint32_t frequencies = 4;
};

// Network input scaling and output mixing at one noise level. The network sees
// c_in * x plus an embedding of c_noise; for the denoiser parameterization the
// output is D = c_skip * x + c_out * F.
struct Preconditioning {
  double c_in;
  double c_skip;
  double c_out;
  double c_noise;
};
Preconditioning preconditioning(const NoiseLevel& level);

// Fully connected score network over standardized coordinates.
class MlpDenoiser final : public ScoreModel {
 public:
  MlpDenoiser(std::size_t dim, MlpSpec spec, std::vector<double> data_mean,
              std::vector<double> data_std, std::vector<double> params);

  // Xavier-uniform weights, zero biases, identity standardization.
  static MlpDenoiser create(std::size_t dim, const MlpSpec& spec, std::uint64_t seed);

  std::size_t dim() const override { return dim_; }
  std::vector<double> evaluate(std::span<const double> x, const NoiseLevel& level) const override;
  ScoreJvp jvp(std::span<const double> x, const NoiseLevel& level,
               std::span<const double> v) const override;
  std::vector<double> to_model_space(std::span<const double> x0) const override;
  std::vector<std::uint8_t> serialize() const override;

  const MlpSpec& spec() const { return spec_; }
  // Piecewise-linear activations make the score Jacobian piecewise constant.
  bool smooth() const { return spec_.activation != Activation::kRelu; }
  std::size_t input_dim() const { return dim_ + 1 + 2 * spec_.frequencies; }
  // Widths of every layer, input and output included.
  std::vector<std::size_t> layer_sizes() const;
  static std::size_t parameter_count(std::size_t dim, const MlpSpec& spec);

  const std::vector<double>& params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }
  const std::vector<double>& data_mean() const { return mean_; }
  const std::vector<double>& data_std() const { return std_; }
  void set_standardization(std::vector<double> mean, std::vector<double> stddev);

  // Network input for point x (model space) at a level.
  template <typename S>
  void features(std::span<const S> x, const Preconditioning& pc, std::span<S> out) const;
  // Raw network output F for one feature vector.
  template <typename S>
  void network(std::span<const S> input, std::span<S> out) const;
  template <typename S>
  void score_into(std::span<const S> x, const NoiseLevel& level, std::span<S> out) const;

 private:
  std::size_t dim_;
  MlpSpec spec_;
  std::vector<double> mean_;
  std::vector<double> std_;
  std::vector<double> params_;
};

template <typename S>
S activate(Activation a, S z) {
  using std::exp;
  using std::tanh;
  switch (a) {
    case Activation::kSilu:
      return z / (1.0 + exp(-z));
    case Activation::kTanh:
      return tanh(z);
    case Activation::kRelu:
      return value_of(z) > 0.0 ? z : S(0.0);
  }
  return z;
}

template <typename S>
void MlpDenoiser::features(std::span<const S> x, const Preconditioning& pc, std::span<S> out) const {
  for (std::size_t i = 0; i < dim_; ++i) out[i] = pc.c_in * x[i];
  out[dim_] = pc.c_noise;
  for (std::uint32_t k = 0; k < spec_.frequencies; ++k) {
    const double arg = std::ldexp(pc.c_noise, static_cast<int>(k)) * M_PI;
    out[dim_ + 1 + 2 * k] = std::sin(arg);
    out[dim_ + 2 + 2 * k] = std::cos(arg);
  }
}

template <typename S>
void MlpDenoiser::network(std::span<const S> input, std::span<S> out) const {
  const auto sizes = layer_sizes();
  std::vector<S> current(input.begin(), input.end());
  std::vector<S> next;
  const double* p = params_.data();
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = sizes[l];
    const std::size_t outn = sizes[l + 1];
    const double* w = p;
    const double* b = p + in * outn;
    const bool last = l + 2 == sizes.size();
    next.assign(outn, S(0.0));
    for (std::size_t i = 0; i < outn; ++i) {
      S z = b[i];
      const double* row = w + i * in;
      for (std::size_t j = 0; j < in; ++j) z += current[j] * row[j];
      next[i] = last ? z : activate(spec_.activation, z);
    }
    p = b + outn;
    current.swap(next);
  }
  for (std::size_t i = 0; i < dim_; ++i) out[i] = current[i];
}

template <typename S>
void MlpDenoiser::score_into(std::span<const S> x, const NoiseLevel& level, std::span<S> out) const {
  const Preconditioning pc = preconditioning(level);
  std::vector<S> in(input_dim());
  features<S>(x, pc, in);
  std::vector<S> f(dim_);
  network<S>(in, f);
  if (spec_.parameterization == Parameterization::kEps) {
    for (std::size_t i = 0; i < dim_; ++i) out[i] = -f[i] / level.sigma;
  } else {
    const double var = level.sigma * level.sigma;
    for (std::size_t i = 0; i < dim_; ++i) {
      const S denoised = pc.c_skip * x[i] + pc.c_out * f[i];
      out[i] = (denoised - x[i]) / var;
    }
  }
}

}  // namespace scoped
