#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "scoped/schedule.hpp"

namespace scoped {

struct ScoreJvp {
  std::vector<double> score;    // identical to evaluate() at the same inputs
  std::vector<double> tangent;  // J v, the directional derivative of the score along v
};

// Anything producing grad_x log p_t(x_t). Scores use the +grad log p convention.
// Implementations are immutable once built and safe to call concurrently.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;

  virtual std::size_t dim() const = 0;
  virtual std::vector<double> evaluate(std::span<const double> x, const NoiseLevel& level) const = 0;
  // Exact forward-mode JVP, never finite differences.
  virtual ScoreJvp jvp(std::span<const double> x, const NoiseLevel& level,
                       std::span<const double> v) const = 0;
  // Maps a raw clean data point into the coordinates the model was fit in.
  virtual std::vector<double> to_model_space(std::span<const double> x0) const {
    return {x0.begin(), x0.end()};
  }
  // SCPD encoding; also the input to the model fingerprint.
  virtual std::vector<std::uint8_t> serialize() const = 0;
};

std::uint64_t model_fingerprint(const ScoreModel& model);

// Decorator counting forward passes and JVPs, for NFE accounting.
class CountingScoreModel final : public ScoreModel {
 public:
  explicit CountingScoreModel(const ScoreModel& inner) : inner_(inner) {}

  std::size_t dim() const override { return inner_.dim(); }
  std::vector<double> evaluate(std::span<const double> x, const NoiseLevel& level) const override {
    forwards_.fetch_add(1, std::memory_order_relaxed);
    return inner_.evaluate(x, level);
  }
  ScoreJvp jvp(std::span<const double> x, const NoiseLevel& level,
               std::span<const double> v) const override {
    jvps_.fetch_add(1, std::memory_order_relaxed);
    return inner_.jvp(x, level, v);
  }
  std::vector<double> to_model_space(std::span<const double> x0) const override {
    return inner_.to_model_space(x0);
  }
  std::vector<std::uint8_t> serialize() const override { return inner_.serialize(); }

  std::uint64_t forwards() const { return forwards_.load(); }
  std::uint64_t jvps() const { return jvps_.load(); }
  void reset() {
    forwards_ = 0;
    jvps_ = 0;
  }

 private:
  const ScoreModel& inner_;
  mutable std::atomic<std::uint64_t> forwards_{0};
  mutable std::atomic<std::uint64_t> jvps_{0};
};

}  // namespace scoped
