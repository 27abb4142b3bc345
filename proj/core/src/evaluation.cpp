#include "scoped/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "scoped/errors.hpp"

namespace scoped {
namespace {

// Total order on doubles with NaN above +inf.
bool key_less(double a, double b) {
  if (std::isnan(a)) return false;
  if (std::isnan(b)) return true;
  return a < b;
}

bool key_equal(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return a == b;
}

struct Ranked {
  std::pair<double, double> key;
  bool ood;
};

bool ranked_less(const Ranked& a, const Ranked& b) {
  if (!key_equal(a.key.first, b.key.first)) return key_less(a.key.first, b.key.first);
  return key_less(a.key.second, b.key.second);
}

bool ranked_equal(const Ranked& a, const Ranked& b) {
  return key_equal(a.key.first, b.key.first) && key_equal(a.key.second, b.key.second);
}

std::vector<std::pair<double, double>> keys_of(std::span<const AnomalyScore> scores) {
  std::vector<std::pair<double, double>> out;
  out.reserve(scores.size());
  for (const auto& s : scores) out.emplace_back(s.value, s.at_floor ? s.tie_key : 0.0);
  return out;
}

double level_order_key(const NoiseLevel& lv) { return lv.continuous() ? lv.sigma : lv.step; }

}  // namespace

double auroc(std::span<const std::pair<double, double>> id_keys,
             std::span<const std::pair<double, double>> ood_keys) {
  if (id_keys.empty() || ood_keys.empty()) throw InputError("auroc needs non-empty ID and OOD batches");
  std::vector<Ranked> all;
  all.reserve(id_keys.size() + ood_keys.size());
  for (const auto& k : id_keys) all.push_back({k, false});
  for (const auto& k : ood_keys) all.push_back({k, true});
  std::sort(all.begin(), all.end(), ranked_less);

  // Twice the Mann-Whitney U, kept integral so ties at 1/2 are exact.
  std::uint64_t twice_u = 0;
  std::uint64_t ids_below = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    std::uint64_t ids = 0;
    std::uint64_t oods = 0;
    while (j < all.size() && ranked_equal(all[i], all[j])) {
      (all[j].ood ? oods : ids) += 1;
      ++j;
    }
    twice_u += 2 * oods * ids_below + oods * ids;
    ids_below += ids;
    i = j;
  }
  const double pairs = static_cast<double>(id_keys.size()) * static_cast<double>(ood_keys.size());
  return static_cast<double>(twice_u) / (2.0 * pairs);
}

double auroc(std::span<const double> id_scores, std::span<const double> ood_scores) {
  std::vector<std::pair<double, double>> a, b;
  a.reserve(id_scores.size());
  b.reserve(ood_scores.size());
  for (double v : id_scores) a.emplace_back(v, 0.0);
  for (double v : ood_scores) b.emplace_back(v, 0.0);
  return auroc(std::span<const std::pair<double, double>>(a), std::span<const std::pair<double, double>>(b));
}

double auroc(std::span<const AnomalyScore> id_scores, std::span<const AnomalyScore> ood_scores) {
  const auto a = keys_of(id_scores);
  const auto b = keys_of(ood_scores);
  return auroc(std::span<const std::pair<double, double>>(a), std::span<const std::pair<double, double>>(b));
}

NfeCount nfe_account(Variant variant, const TypicalityConfig& cfg) {
  cfg.validate();
  const std::uint64_t levels = variant == Variant::kTwoStep ? 2 : 1;
  return {levels, levels * cfg.num_probes};
}

PairResult evaluate_pair(const PairSpec& spec, std::size_t workers) {
  if (!spec.id_data || !spec.ood_data || !spec.model || !spec.artifact)
    throw InputError("pair " + spec.id_name + "/" + spec.ood_name + " is incomplete");
  if (spec.id_data->dim != spec.ood_data->dim)
    throw ConsistencyError("pair " + spec.id_name + "/" + spec.ood_name + ": datasets differ in dimension");
  const auto id = score_dataset(*spec.artifact, *spec.model, *spec.id_data, workers, Domain::kScore);
  const auto ood = score_dataset(*spec.artifact, *spec.model, *spec.ood_data, workers, Domain::kScore);
  PairResult r;
  r.id_name = spec.id_name;
  r.ood_name = spec.ood_name;
  r.auroc = auroc(std::span<const AnomalyScore>(id), std::span<const AnomalyScore>(ood));
  r.n_id = id.size();
  r.n_ood = ood.size();
  for (const auto& s : id) r.floor_ties += s.at_floor ? 1 : 0;
  for (const auto& s : ood) r.floor_ties += s.at_floor ? 1 : 0;
  return r;
}

EvalReport evaluate_pairs(std::span<const PairSpec> specs, std::size_t workers) {
  EvalReport report;
  if (specs.empty()) return report;
  report.variant = specs.front().artifact ? specs.front().artifact->variant : Variant::kSingle;
  if (specs.front().artifact) {
    report.nfe = nfe_account(report.variant, specs.front().artifact->typicality);
    report.seed = specs.front().artifact->typicality.seed;
  }
  for (const auto& spec : specs) report.pairs.push_back(evaluate_pair(spec, workers));
  return report;
}

std::vector<AblationRow> ablate_timesteps(const AblationInputs& in, std::span<const NoiseLevel> levels,
                                          const TypicalityConfig& cfg, BandwidthRule bandwidth,
                                          std::size_t workers) {
  if (!in.model || !in.id_calibration || !in.id_eval || !in.ood) throw InputError("ablation inputs incomplete");
  if (levels.empty()) throw InputError("ablation needs at least one level");
  std::vector<AblationRow> rows;
  for (const auto& level : levels) {
    CalibrationOptions opts;
    opts.variant = Variant::kSingle;
    opts.bandwidth = bandwidth;
    opts.workers = workers;
    const auto art = calibrate(*in.model, *in.id_calibration, std::span(&level, 1), in.schedule_fp, cfg, opts);
    PairSpec spec{"id", "ood", in.id_eval, in.ood, in.model, &art};
    rows.push_back({level, evaluate_pair(spec, workers).auroc});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const AblationRow& a, const AblationRow& b) {
    return level_order_key(a.level) < level_order_key(b.level);
  });
  return rows;
}

AblationRow oracle_timestep(std::span<const AblationRow> table) {
  if (table.empty()) throw InputError("oracle_timestep: empty table");
  AblationRow best = table.front();
  for (const auto& row : table.subspan(1)) {
    if (row.auroc > best.auroc ||
        (row.auroc == best.auroc && level_order_key(row.level) < level_order_key(best.level)))
      best = row;
  }
  return best;
}

void write_matrix_csv(std::ostream& out, const EvalReport& report, std::span<const std::string> rows,
                      std::span<const std::string> cols) {
  out << "train";
  for (const auto& c : cols) out << ',' << c;
  out << '\n' << std::setprecision(6) << std::fixed;
  for (const auto& r : rows) {
    out << r;
    for (const auto& c : cols) {
      out << ',';
      for (const auto& p : report.pairs)
        if (p.id_name == r && p.ood_name == c) {
          out << p.auroc;
          break;
        }
    }
    out << '\n';
  }
}

}  // namespace scoped
