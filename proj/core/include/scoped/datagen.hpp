#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "scoped/analytic.hpp"
#include "scoped/dataset.hpp"

namespace scoped {

enum class DatasetKind { kGaussian, kGmm, kRing, kTwoMoons, kShiftedPair, kReplayMixture };

DatasetKind parse_dataset_kind(std::string_view name);
std::string_view to_string(DatasetKind k);

// Synthetic dataset description. Fields irrelevant to a kind are ignored.
struct DatasetSpec {
  DatasetKind kind = DatasetKind::kGaussian;
  std::size_t dim = 2;
  std::size_t size = 1000;
  std::uint64_t seed = 0;

  std::vector<double> mean;  // gaussian / shifted-pair centre; empty means the origin
  double scale = 1.0;        // isotropic std (noise level for ring and two-moons)

  // gmm: explicit components
  std::vector<std::vector<double>> means;
  std::vector<double> scales;
  std::vector<double> weights;  // also replay-mixture weights; empty means uniform

  double radius = 1.0;       // ring
  std::vector<double> shift;  // shifted-pair: added to the second half of the rows

  // replay-mixture: `components` centres drawn uniformly in [-spread, spread]^dim
  // from layout_seed, so two specs differing only in `seed` share a distribution.
  std::size_t components = 4;
  double spread = 3.0;
  std::uint64_t layout_seed = 0;

  void validate() const;
};

// Rows are generated in fixed-size chunks, each from its own derived stream, so
// the output does not depend on `workers`.
Dataset generate(const DatasetSpec& spec, std::size_t workers = 1);

// Exact density of a gaussian, gmm or replay-mixture spec.
GmmScore mixture_oracle(const DatasetSpec& spec);

// Resolves a replay-mixture spec into an explicit gmm spec.
DatasetSpec resolve_mixture(const DatasetSpec& spec);

enum class ShiftKind { kReward, kPolicy, kSeed };
ShiftKind parse_shift_kind(std::string_view name);
std::string_view to_string(ShiftKind k);

struct TaskPairSpecs {
  DatasetSpec id;
  DatasetSpec ood;
};

// reward: the mixture's components split into two halves pushed apart along the
// first coordinate (disjoint supports); policy: same components, weights
// reversed; seed: identical distribution, different sampling seed.
TaskPairSpecs task_pair_specs(ShiftKind kind, const DatasetSpec& base);
std::pair<Dataset, Dataset> make_task_pair(ShiftKind kind, const DatasetSpec& base);

}  // namespace scoped
