#pragma once

#include <span>
#include <vector>

#include "scoped/errors.hpp"

namespace scoped {

// s = -eps / sigma for a noise-prediction network.
std::vector<double> score_from_eps(std::span<const double> eps_pred, double sigma);

// s = (D - x) / sigma^2 for a denoiser network.
std::vector<double> score_from_denoiser(std::span<const double> denoised, std::span<const double> x,
                                        double sigma);

// Inverse of score_from_eps: eps = -sigma * s.
std::vector<double> eps_from_score(std::span<const double> score, double sigma);

}  // namespace scoped
