#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "scoped/dual.hpp"
#include "scoped/score_model.hpp"

namespace scoped {

// Isotropic Gaussian N(mean, variance I). At a noise level the model answers
// for the corrupted marginal N(s*mean, (s^2 variance + sigma^2) I).
class AnalyticGaussianScore final : public ScoreModel {
 public:
  AnalyticGaussianScore(std::vector<double> mean, double variance);

  std::size_t dim() const override { return mean_.size(); }
  std::vector<double> evaluate(std::span<const double> x, const NoiseLevel& level) const override;
  ScoreJvp jvp(std::span<const double> x, const NoiseLevel& level,
               std::span<const double> v) const override;
  std::vector<std::uint8_t> serialize() const override;

  const std::vector<double>& mean() const { return mean_; }
  double variance() const { return variance_; }
  double marginal_variance(const NoiseLevel& level) const {
    return level.signal_scale * level.signal_scale * variance_ + level.sigma * level.sigma;
  }
  double log_density(std::span<const double> x, const NoiseLevel& level = kCleanLevel) const;

 private:
  std::vector<double> mean_;
  double variance_;
};

// Isotropic Gaussian mixture sum_k w_k N(m_k, v_k I), composed with corruption
// the same way as AnalyticGaussianScore.
class GmmScore final : public ScoreModel {
 public:
  GmmScore(std::vector<double> weights, std::vector<std::vector<double>> means,
           std::vector<double> variances);

  std::size_t dim() const override { return dim_; }
  std::vector<double> evaluate(std::span<const double> x, const NoiseLevel& level) const override;
  ScoreJvp jvp(std::span<const double> x, const NoiseLevel& level,
               std::span<const double> v) const override;
  std::vector<std::uint8_t> serialize() const override;

  std::size_t components() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<std::vector<double>>& means() const { return means_; }
  const std::vector<double>& variances() const { return variances_; }
  double log_density(std::span<const double> x, const NoiseLevel& level = kCleanLevel) const;

  template <typename S>
  void score_into(std::span<const S> x, const NoiseLevel& level, std::span<S> out) const;

 private:
  std::size_t dim_;
  std::vector<double> weights_;
  std::vector<std::vector<double>> means_;
  std::vector<double> variances_;
};

// Clean-density scores.
std::vector<double> gaussian_score(const AnalyticGaussianScore& model, std::span<const double> x);
std::vector<double> gmm_score(const GmmScore& model, std::span<const double> x);

template <typename S>
void GmmScore::score_into(std::span<const S> x, const NoiseLevel& level, std::span<S> out) const {
  const std::size_t k_count = weights_.size();
  const double s = level.signal_scale;
  std::vector<S> log_terms(k_count);
  std::vector<double> var(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    var[k] = s * s * variances_[k] + level.sigma * level.sigma;
    S sq = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      const S diff = x[i] - s * means_[k][i];
      sq += diff * diff;
    }
    log_terms[k] = std::log(weights_[k]) - 0.5 * static_cast<double>(dim_) * std::log(2.0 * M_PI * var[k]) -
                   sq / (2.0 * var[k]);
  }
  // Responsibilities via log-sum-exp; the max is taken on primal values only.
  double max_log = -INFINITY;
  for (const S& t : log_terms) max_log = std::max(max_log, value_of(t));
  S norm = 0.0;
  std::vector<S> resp(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    if (weights_[k] <= 0.0) continue;
    using std::exp;
    resp[k] = exp(log_terms[k] - max_log);
    norm += resp[k];
  }
  for (std::size_t i = 0; i < dim_; ++i) out[i] = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    if (weights_[k] <= 0.0) continue;
    const S r = resp[k] / norm;
    for (std::size_t i = 0; i < dim_; ++i) out[i] += r * ((s * means_[k][i] - x[i]) / var[k]);
  }
}

}  // namespace scoped
