#include "scoped/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scoped/errors.hpp"
#include "scoped/parallel.hpp"
#include "scoped/rng.hpp"

namespace scoped {
namespace {

constexpr std::size_t kChunkRows = 1024;

std::vector<double> normalized(std::vector<double> w, std::size_t k) {
  if (w.empty()) w.assign(k, 1.0);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= total;
  return w;
}

std::size_t pick(const std::vector<double>& weights, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return k;
  }
  return weights.size() - 1;
}

void draw_row(const DatasetSpec& spec, std::size_t row, Rng& rng, std::span<double> out) {
  const std::size_t d = spec.dim;
  switch (spec.kind) {
    case DatasetKind::kGaussian:
      for (std::size_t i = 0; i < d; ++i) out[i] = (spec.mean.empty() ? 0.0 : spec.mean[i]) + spec.scale * rng.normal();
      return;
    case DatasetKind::kShiftedPair: {
      const bool shifted = row >= spec.size / 2;
      for (std::size_t i = 0; i < d; ++i)
        out[i] = (spec.mean.empty() ? 0.0 : spec.mean[i]) + (shifted ? spec.shift[i] : 0.0) +
                 spec.scale * rng.normal();
      return;
    }
    case DatasetKind::kGmm: {
      const std::size_t k = pick(spec.weights, rng.uniform());
      for (std::size_t i = 0; i < d; ++i) out[i] = spec.means[k][i] + spec.scales[k] * rng.normal();
      return;
    }
    case DatasetKind::kRing: {
      const double theta = 2.0 * M_PI * rng.uniform();
      const double r = spec.radius + spec.scale * rng.normal();
      out[0] = r * std::cos(theta);
      out[1] = r * std::sin(theta);
      for (std::size_t i = 2; i < d; ++i) out[i] = spec.scale * rng.normal();
      return;
    }
    case DatasetKind::kTwoMoons: {
      const double theta = M_PI * rng.uniform();
      const bool lower = rng.uniform() < 0.5;
      out[0] = (lower ? 1.0 - std::cos(theta) : std::cos(theta)) + spec.scale * rng.normal();
      out[1] = (lower ? 0.5 - std::sin(theta) : std::sin(theta)) + spec.scale * rng.normal();
      for (std::size_t i = 2; i < d; ++i) out[i] = spec.scale * rng.normal();
      return;
    }
    case DatasetKind::kReplayMixture:
      break;  // resolved to kGmm before drawing
  }
}

}  // namespace

DatasetKind parse_dataset_kind(std::string_view name) {
  if (name == "gaussian") return DatasetKind::kGaussian;
  if (name == "gmm") return DatasetKind::kGmm;
  if (name == "ring") return DatasetKind::kRing;
  if (name == "two-moons") return DatasetKind::kTwoMoons;
  if (name == "shifted-pair") return DatasetKind::kShiftedPair;
  if (name == "replay-mixture") return DatasetKind::kReplayMixture;
  throw InputError("kind: unknown dataset kind \"" + std::string(name) + "\"");
}

std::string_view to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::kGaussian: return "gaussian";
    case DatasetKind::kGmm: return "gmm";
    case DatasetKind::kRing: return "ring";
    case DatasetKind::kTwoMoons: return "two-moons";
    case DatasetKind::kShiftedPair: return "shifted-pair";
    case DatasetKind::kReplayMixture: return "replay-mixture";
  }
  return "?";
}

void DatasetSpec::validate() const {
  if (dim == 0) throw InputError("dim: must be >= 1");
  if (size == 0) throw InputError("size: must be >= 1");
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw InputError("scale: must be finite and >= 0");
  if (!mean.empty() && mean.size() != dim) throw InputError("mean: length must equal dim");
  switch (kind) {
    case DatasetKind::kGmm:
      if (means.empty()) throw InputError("means: gmm needs at least one component");
      for (const auto& m : means)
        if (m.size() != dim) throw InputError("means: every component mean must have length dim");
      if (scales.size() != means.size()) throw InputError("scales: one per component required");
      if (!weights.empty() && weights.size() != means.size())
        throw InputError("weights: one per component required");
      break;
    case DatasetKind::kRing:
    case DatasetKind::kTwoMoons:
      if (dim < 2) throw InputError("dim: ring and two-moons need dim >= 2");
      break;
    case DatasetKind::kShiftedPair:
      if (shift.size() != dim) throw InputError("shift: length must equal dim");
      break;
    case DatasetKind::kReplayMixture:
      if (components == 0) throw InputError("components: must be >= 1");
      if (!weights.empty() && weights.size() != components)
        throw InputError("weights: one per component required");
      if (!(spread >= 0.0)) throw InputError("spread: must be >= 0");
      break;
    case DatasetKind::kGaussian:
      break;
  }
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("weights: must be non-negative");
  if (!weights.empty() && std::accumulate(weights.begin(), weights.end(), 0.0) <= 0.0)
    throw InputError("weights: must not all be zero");
}

DatasetSpec resolve_mixture(const DatasetSpec& spec) {
  if (spec.kind != DatasetKind::kReplayMixture) return spec;
  DatasetSpec out = spec;
  out.kind = DatasetKind::kGmm;
  Rng layout(derive_seed(spec.layout_seed, {static_cast<std::uint64_t>(Stream::kData), 0xC0FFEEULL}));
  out.means.assign(spec.components, std::vector<double>(spec.dim));
  for (auto& m : out.means)
    for (double& v : m) v = (2.0 * layout.uniform() - 1.0) * spec.spread;
  out.scales.assign(spec.components, spec.scale);
  out.weights = normalized(spec.weights, spec.components);
  return out;
}

Dataset generate(const DatasetSpec& spec, std::size_t workers) {
  spec.validate();
  DatasetSpec resolved = resolve_mixture(spec);
  if (resolved.kind == DatasetKind::kGmm) resolved.weights = normalized(resolved.weights, resolved.means.size());
  Dataset data(spec.dim, std::vector<double>(spec.size * spec.dim));
  const std::size_t chunks = (spec.size + kChunkRows - 1) / kChunkRows;
  parallel_for(chunks, workers, [&](std::size_t c) {
    Rng rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(Stream::kData), c}));
    const std::size_t end = std::min(spec.size, (c + 1) * kChunkRows);
    for (std::size_t r = c * kChunkRows; r < end; ++r) draw_row(resolved, r, rng, data.row(r));
  });
  return data;
}

GmmScore mixture_oracle(const DatasetSpec& spec) {
  spec.validate();
  if (spec.kind == DatasetKind::kGaussian) {
    return GmmScore({1.0}, {spec.mean.empty() ? std::vector<double>(spec.dim, 0.0) : spec.mean},
                    {spec.scale * spec.scale});
  }
  const DatasetSpec g = resolve_mixture(spec);
  if (g.kind != DatasetKind::kGmm) throw InputError("kind: no closed-form density for " + std::string(to_string(spec.kind)));
  std::vector<double> variances;
  for (double s : g.scales) variances.push_back(s * s);
  return GmmScore(normalized(g.weights, g.means.size()), g.means, variances);
}

ShiftKind parse_shift_kind(std::string_view name) {
  if (name == "reward-shift") return ShiftKind::kReward;
  if (name == "policy-shift") return ShiftKind::kPolicy;
  if (name == "seed-shift") return ShiftKind::kSeed;
  throw InputError("pair: unknown shift kind \"" + std::string(name) + "\"");
}

std::string_view to_string(ShiftKind k) {
  switch (k) {
    case ShiftKind::kReward: return "reward-shift";
    case ShiftKind::kPolicy: return "policy-shift";
    case ShiftKind::kSeed: return "seed-shift";
  }
  return "?";
}

TaskPairSpecs task_pair_specs(ShiftKind kind, const DatasetSpec& base) {
  base.validate();
  TaskPairSpecs out{base, base};
  out.ood.seed = derive_seed(base.seed, {0x00D5EEDULL});
  if (kind == ShiftKind::kSeed) return out;

  DatasetSpec g = resolve_mixture(base);
  if (g.kind != DatasetKind::kGmm) throw InputError("kind: task pairs need a gmm or replay-mixture base");
  const std::size_t k = g.means.size();
  if (k < 2) throw InputError("components: task pairs need at least two mixture components");
  g.weights = normalized(g.weights, k);

  if (kind == ShiftKind::kPolicy) {
    std::vector<double> w = g.weights;
    if (std::all_of(w.begin(), w.end(), [&](double v) { return v == w.front(); })) {
      // Uniform base: skew geometrically from 9:1 at the ends.
      for (std::size_t i = 0; i < k; ++i) w[i] = std::pow(9.0, -static_cast<double>(i) / static_cast<double>(k - 1));
      w = normalized(w, k);
    }
    out.id = g;
    out.ood = g;
    out.id.weights = w;
    out.ood.weights.assign(w.rbegin(), w.rend());
    out.ood.seed = derive_seed(base.seed, {0x00D5EEDULL});
    return out;
  }

  // Reward shift: push halves apart along coordinate 0 by more than their extent.
  double max_scale = 0.0;
  for (double s : g.scales) max_scale = std::max(max_scale, s);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& m : g.means) {
    lo = std::min(lo, m[0]);
    hi = std::max(hi, m[0]);
  }
  const double gap = (hi - lo) + 12.0 * max_scale;
  const std::size_t half = k / 2;
  DatasetSpec first = g, second = g;
  first.means.assign(g.means.begin(), g.means.begin() + static_cast<std::ptrdiff_t>(half));
  first.scales.assign(g.scales.begin(), g.scales.begin() + static_cast<std::ptrdiff_t>(half));
  first.weights = normalized({g.weights.begin(), g.weights.begin() + static_cast<std::ptrdiff_t>(half)}, half);
  second.means.assign(g.means.begin() + static_cast<std::ptrdiff_t>(half), g.means.end());
  second.scales.assign(g.scales.begin() + static_cast<std::ptrdiff_t>(half), g.scales.end());
  second.weights = normalized({g.weights.begin() + static_cast<std::ptrdiff_t>(half), g.weights.end()}, k - half);
  for (auto& m : first.means) m[0] -= gap / 2.0;
  for (auto& m : second.means) m[0] += gap / 2.0;
  out.id = first;
  out.ood = second;
  out.ood.seed = derive_seed(base.seed, {0x00D5EEDULL});
  return out;
}

std::pair<Dataset, Dataset> make_task_pair(ShiftKind kind, const DatasetSpec& base) {
  const auto specs = task_pair_specs(kind, base);
  return {generate(specs.id), generate(specs.ood)};
}

}  // namespace scoped
