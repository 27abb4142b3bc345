#include "scoped/mlp.hpp"

#include <cmath>

#include "scoped/errors.hpp"
#include "scoped/model_io.hpp"
#include "scoped/rng.hpp"

namespace scoped {

Activation parse_activation(std::string_view name) {
  if (name == "silu") return Activation::kSilu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw InputError("unknown activation \"" + std::string(name) + "\"");
}

Parameterization parse_parameterization(std::string_view name) {
  if (name == "eps") return Parameterization::kEps;
  if (name == "denoiser") return Parameterization::kDenoiser;
  throw InputError("unknown parameterization \"" + std::string(name) + "\"");
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kSilu: return "silu";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
  }
  return "?";
}

std::string_view to_string(Parameterization p) {
  return p == Parameterization::kEps ? "eps" : "denoiser";
}

Preconditioning preconditioning(const NoiseLevel& level) {
  if (!(level.sigma > 0.0) || !std::isfinite(level.sigma))
    throw InputError("score network needs a positive noise scale");
  const double s = level.signal_scale;
  const double var = s * s + level.sigma * level.sigma;
  const double root = std::sqrt(var);
  return {1.0 / root, s * s / var, level.sigma * s / root, std::log(level.sigma) / 4.0};
}

std::size_t MlpDenoiser::parameter_count(std::size_t dim, const MlpSpec& spec) {
  std::size_t prev = dim + 1 + 2 * spec.frequencies;
  std::size_t total = 0;
  for (std::uint32_t h : spec.hidden) {
    total += prev * h + h;
    prev = h;
  }
  return total + prev * dim + dim;
}

std::vector<std::size_t> MlpDenoiser::layer_sizes() const {
  std::vector<std::size_t> sizes{input_dim()};
  for (std::uint32_t h : spec_.hidden) sizes.push_back(h);
  sizes.push_back(dim_);
  return sizes;
}

MlpDenoiser::MlpDenoiser(std::size_t dim, MlpSpec spec, std::vector<double> data_mean,
                         std::vector<double> data_std, std::vector<double> params)
    : dim_(dim), spec_(std::move(spec)), mean_(std::move(data_mean)), std_(std::move(data_std)),
      params_(std::move(params)) {
  if (dim_ == 0) throw InputError("network dimension must be >= 1");
  for (std::uint32_t h : spec_.hidden)
    if (h == 0) throw InputError("hidden layer widths must be >= 1");
  if (params_.size() != parameter_count(dim_, spec_))
    throw InputError("network parameter count does not match its layer widths");
  for (double p : params_)
    if (!std::isfinite(p)) throw NumericError("network parameters must be finite");
  set_standardization(std::move(mean_), std::move(std_));
}

void MlpDenoiser::set_standardization(std::vector<double> mean, std::vector<double> stddev) {
  if (mean.size() != dim_ || stddev.size() != dim_)
    throw InputError("standardization statistics do not match the network dimension");
  for (std::size_t i = 0; i < dim_; ++i)
    if (!std::isfinite(mean[i]) || !(stddev[i] > 0.0))
      throw InputError("standardization needs finite means and positive scales");
  mean_ = std::move(mean);
  std_ = std::move(stddev);
}

MlpDenoiser MlpDenoiser::create(std::size_t dim, const MlpSpec& spec, std::uint64_t seed) {
  std::vector<double> params(parameter_count(dim, spec));
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(Stream::kInit)}));
  std::vector<std::size_t> sizes{dim + 1 + 2 * spec.frequencies};
  for (std::uint32_t h : spec.hidden) sizes.push_back(h);
  sizes.push_back(dim);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = sizes[l];
    const std::size_t out = sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    for (std::size_t i = 0; i < in * out; ++i) params[offset + i] = (2.0 * rng.uniform() - 1.0) * limit;
    offset += in * out + out;  // biases stay zero
  }
  return MlpDenoiser(dim, spec, std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0),
                     std::move(params));
}

std::vector<double> MlpDenoiser::evaluate(std::span<const double> x, const NoiseLevel& level) const {
  if (x.size() != dim_) throw InputError("score network input has the wrong dimension");
  std::vector<double> out(dim_);
  score_into<double>(x, level, out);
  return out;
}

ScoreJvp MlpDenoiser::jvp(std::span<const double> x, const NoiseLevel& level,
                          std::span<const double> v) const {
  if (x.size() != dim_ || v.size() != dim_)
    throw InputError("score network jvp inputs have the wrong dimension");
  std::vector<Dual> xd(dim_), out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) xd[i] = Dual(x[i], v[i]);
  score_into<Dual>(xd, level, out);
  ScoreJvp r{std::vector<double>(dim_), std::vector<double>(dim_)};
  for (std::size_t i = 0; i < dim_; ++i) {
    r.score[i] = out[i].v;
    r.tangent[i] = out[i].d;
  }
  return r;
}

std::vector<double> MlpDenoiser::to_model_space(std::span<const double> x0) const {
  if (x0.size() != dim_) throw InputError("data point has the wrong dimension for this model");
  std::vector<double> out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) out[i] = (x0[i] - mean_[i]) / std_[i];
  return out;
}

std::vector<std::uint8_t> MlpDenoiser::serialize() const { return encode_mlp(*this); }

}  // namespace scoped
