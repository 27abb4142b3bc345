#include "scoped/conversions.hpp"

#include <cmath>

namespace scoped {
namespace {

void require_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("noise scale must be positive");
}

}  // namespace

std::vector<double> score_from_eps(std::span<const double> eps_pred, double sigma) {
  require_sigma(sigma);
  std::vector<double> out(eps_pred.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -eps_pred[i] / sigma;
  return out;
}

std::vector<double> score_from_denoiser(std::span<const double> denoised, std::span<const double> x,
                                        double sigma) {
  require_sigma(sigma);
  if (denoised.size() != x.size()) throw InputError("denoiser output and input differ in dimension");
  const double var = sigma * sigma;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (denoised[i] - x[i]) / var;
  return out;
}

std::vector<double> eps_from_score(std::span<const double> score, double sigma) {
  require_sigma(sigma);
  std::vector<double> out(score.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -sigma * score[i];
  return out;
}

}  // namespace scoped
