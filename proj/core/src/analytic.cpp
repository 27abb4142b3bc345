#include "scoped/analytic.hpp"

#include <algorithm>
#include <numeric>

#include "scoped/bytes.hpp"
#include "scoped/errors.hpp"
#include "scoped/model_io.hpp"

namespace scoped {
namespace {

void check_dims(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got)
    throw InputError(std::string(what) + ": dimension " + std::to_string(got) + ", model expects " +
                     std::to_string(expected));
}

}  // namespace

AnalyticGaussianScore::AnalyticGaussianScore(std::vector<double> mean, double variance)
    : mean_(std::move(mean)), variance_(variance) {
  if (mean_.empty()) throw InputError("gaussian oracle needs dimension >= 1");
  if (!std::isfinite(variance_) || variance_ <= 0.0)
    throw InputError("gaussian oracle variance must be positive");
}

std::vector<double> AnalyticGaussianScore::evaluate(std::span<const double> x,
                                                    const NoiseLevel& level) const {
  check_dims(mean_.size(), x.size(), "gaussian score");
  const double var = marginal_variance(level);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = -(x[i] - level.signal_scale * mean_[i]) / var;
  return out;
}

ScoreJvp AnalyticGaussianScore::jvp(std::span<const double> x, const NoiseLevel& level,
                                    std::span<const double> v) const {
  check_dims(mean_.size(), v.size(), "gaussian jvp direction");
  ScoreJvp r{evaluate(x, level), std::vector<double>(v.size())};
  const double var = marginal_variance(level);
  for (std::size_t i = 0; i < v.size(); ++i) r.tangent[i] = -v[i] / var;
  return r;
}

double AnalyticGaussianScore::log_density(std::span<const double> x, const NoiseLevel& level) const {
  check_dims(mean_.size(), x.size(), "gaussian density");
  const double var = marginal_variance(level);
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - level.signal_scale * mean_[i];
    sq += d * d;
  }
  return -0.5 * static_cast<double>(x.size()) * std::log(2.0 * M_PI * var) - sq / (2.0 * var);
}

std::vector<std::uint8_t> AnalyticGaussianScore::serialize() const { return encode_gaussian(*this); }

GmmScore::GmmScore(std::vector<double> weights, std::vector<std::vector<double>> means,
                   std::vector<double> variances)
    : weights_(std::move(weights)), means_(std::move(means)), variances_(std::move(variances)) {
  if (weights_.empty()) throw InputError("mixture needs at least one component");
  if (means_.size() != weights_.size() || variances_.size() != weights_.size())
    throw InputError("mixture weights, means and variances disagree in length");
  dim_ = means_.front().size();
  if (dim_ == 0) throw InputError("mixture dimension must be >= 1");
  for (const auto& m : means_)
    if (m.size() != dim_) throw InputError("mixture means have inconsistent dimension");
  for (double w : weights_)
    if (!std::isfinite(w) || w < 0.0) throw InputError("mixture weights must be non-negative");
  if (std::abs(std::accumulate(weights_.begin(), weights_.end(), 0.0) - 1.0) > 1e-9)
    throw InputError("mixture weights must sum to 1");
  for (double v : variances_)
    if (!std::isfinite(v) || v <= 0.0) throw InputError("mixture variances must be positive");
}

std::vector<double> GmmScore::evaluate(std::span<const double> x, const NoiseLevel& level) const {
  check_dims(dim_, x.size(), "mixture score");
  std::vector<double> out(dim_);
  score_into<double>(x, level, out);
  return out;
}

ScoreJvp GmmScore::jvp(std::span<const double> x, const NoiseLevel& level,
                       std::span<const double> v) const {
  check_dims(dim_, x.size(), "mixture jvp point");
  check_dims(dim_, v.size(), "mixture jvp direction");
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

double GmmScore::log_density(std::span<const double> x, const NoiseLevel& level) const {
  check_dims(dim_, x.size(), "mixture density");
  const double s = level.signal_scale;
  std::vector<double> terms;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (weights_[k] <= 0.0) continue;
    const double var = s * s * variances_[k] + level.sigma * level.sigma;
    double sq = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double d = x[i] - s * means_[k][i];
      sq += d * d;
    }
    terms.push_back(std::log(weights_[k]) - 0.5 * static_cast<double>(dim_) * std::log(2.0 * M_PI * var) -
                    sq / (2.0 * var));
  }
  const double m = *std::max_element(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - m);
  return m + std::log(acc);
}

std::vector<std::uint8_t> GmmScore::serialize() const { return encode_gmm(*this); }

std::vector<double> gaussian_score(const AnalyticGaussianScore& model, std::span<const double> x) {
  return model.evaluate(x, kCleanLevel);
}

std::vector<double> gmm_score(const GmmScore& model, std::span<const double> x) {
  return model.evaluate(x, kCleanLevel);
}

}  // namespace scoped
