#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace scoped {

// Named sub-streams. Every random draw in the library flows from one global seed
// through one of these tags, so components can be re-run independently.
enum class Stream : std::uint64_t {
  kData = 1,
  kTrain = 2,
  kCorrupt = 3,
  kProbe = 4,
  kSplit = 5,
  kInit = 6,
};

// Scoring purpose; keeps calibration draws independent from test-time draws of
// the sample with the same index.
enum class Domain : std::uint64_t {
  kCalibrate = 1,
  kScore = 2,
};

std::uint64_t splitmix64(std::uint64_t x);

// Order-sensitive mix of a seed with a list of integer labels.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> labels);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double rademacher() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }
  std::uint64_t next() { return engine_(); }
  // Uniform integer in [lo, hi].
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }

  void fill_normal(std::span<double> out) {
    for (double& v : out) v = normal();
  }

  template <typename It>
  void shuffle(It first, It last) {
    std::shuffle(first, last, engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace scoped
