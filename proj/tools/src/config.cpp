#include "scoped_cli/config.hpp"

#include <fstream>
#include <sstream>

#include "scoped/bytes.hpp"
#include "scoped/errors.hpp"

namespace scoped::cli {
namespace {

using nlohmann::json;

template <typename T>
T field(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(where + "." + key + ": wrong type");
  }
}

const json& block(const json& root, const char* key) {
  static const json empty = json::object();
  if (!root.contains(key)) return empty;
  const json& b = root.at(key);
  if (!b.is_object()) throw InputError(std::string(key) + ": must be an object");
  return b;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw InputError(where + (where.empty() ? "" : ".") + key + ": unknown field");
  }
}

}  // namespace

NoiseSchedule ProjectConfig::schedule() const {
  const DiscreteScheduleBlock b = discrete.value_or(DiscreteScheduleBlock{});
  return build_linear_schedule(b.steps, b.beta_min, b.beta_max);
}

std::uint64_t ProjectConfig::schedule_fingerprint() const {
  return is_continuous() ? prior_fingerprint(*continuous) : scoped::schedule_fingerprint(schedule());
}

void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw InputError("--set expects key=value, got \"" + assignment + "\"");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw InputError("--set: empty key segment in \"" + path + "\"");
    if (!node->is_object()) throw InputError("--set: \"" + path + "\" descends into a non-object");
    if (dot == std::string::npos) {
      if (value.is_null())
        node->erase(key);
      else
        (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

ProjectConfig parse_config(const json& root) {
  if (!root.is_object()) throw InputError("config: top level must be an object");
  reject_unknown(root, {"seed", "schedule", "continuous", "model", "train", "typicality", "calibration", "eval"}, "");
  ProjectConfig cfg;
  cfg.snapshot = root;
  cfg.seed = field<std::uint64_t>(root, "seed", 0, "config");

  if (root.contains("schedule") && root.contains("continuous"))
    throw InputError("schedule/continuous: give exactly one of the two schedule blocks");
  if (root.contains("continuous")) {
    const json& c = block(root, "continuous");
    reject_unknown(c, {"mu", "sigma_log"}, "continuous");
    LogNormalSigmaPrior prior;
    prior.mu = field(c, "mu", prior.mu, "continuous");
    prior.sigma_log = field(c, "sigma_log", prior.sigma_log, "continuous");
    if (!(prior.sigma_log > 0.0)) throw InputError("continuous.sigma_log: must be > 0");
    cfg.continuous = prior;
  } else {
    const json& s = block(root, "schedule");
    reject_unknown(s, {"T", "beta_min", "beta_max"}, "schedule");
    DiscreteScheduleBlock b;
    b.steps = field(s, "T", b.steps, "schedule");
    b.beta_min = field(s, "beta_min", b.beta_min, "schedule");
    b.beta_max = field(s, "beta_max", b.beta_max, "schedule");
    cfg.discrete = b;
    (void)cfg.schedule();  // validates the bounds
  }

  const json& m = block(root, "model");
  reject_unknown(m, {"hidden", "activation", "parameterization", "frequencies"}, "model");
  cfg.model.hidden = field(m, "hidden", cfg.model.hidden, "model");
  cfg.model.activation = parse_activation(field<std::string>(m, "activation", "silu", "model"));
  cfg.model.parameterization = parse_parameterization(
      field<std::string>(m, "parameterization", cfg.is_continuous() ? "denoiser" : "eps", "model"));
  cfg.model.frequencies = field(m, "frequencies", cfg.model.frequencies, "model");

  const json& t = block(root, "train");
  reject_unknown(t, {"epochs", "batch_size", "learning_rate", "sampling", "weight"}, "train");
  cfg.train.epochs = field(t, "epochs", cfg.train.epochs, "train");
  cfg.train.batch_size = field(t, "batch_size", cfg.train.batch_size, "train");
  cfg.train.learning_rate = field(t, "learning_rate", cfg.train.learning_rate, "train");
  cfg.train.sampling = parse_noise_sampling(
      field<std::string>(t, "sampling", cfg.is_continuous() ? "lognormal" : "uniform", "train"));
  const bool denoiser = cfg.model.parameterization == Parameterization::kDenoiser;
  cfg.train.weight = parse_weight_rule(field<std::string>(t, "weight", denoiser ? "edm" : "sigma2", "train"));
  if (cfg.continuous) cfg.train.prior = *cfg.continuous;
  cfg.train.seed = cfg.seed;
  if (cfg.train.sampling == NoiseSampling::kUniformSteps && cfg.is_continuous())
    throw InputError("train.sampling: uniform step sampling needs a discrete schedule");

  const json& ty = block(root, "typicality");
  reject_unknown(ty, {"probes", "probe_kind", "epsilon", "noise_mode", "sign"}, "typicality");
  cfg.typicality.num_probes = field(ty, "probes", cfg.typicality.num_probes, "typicality");
  cfg.typicality.probe_kind = parse_probe_kind(field<std::string>(ty, "probe_kind", "rademacher", "typicality"));
  cfg.typicality.epsilon = field(ty, "epsilon", cfg.typicality.epsilon, "typicality");
  cfg.typicality.noise_mode = parse_noise_mode(field<std::string>(ty, "noise_mode", "fresh", "typicality"));
  cfg.typicality.apply_sign = field(ty, "sign", true, "typicality");
  cfg.typicality.seed = cfg.seed;
  cfg.typicality.validate();

  const json& c = block(root, "calibration");
  reject_unknown(c, {"variant", "selection", "timesteps", "sigmas", "retention", "early_step", "bandwidth"},
                 "calibration");
  auto& cal = cfg.calibration;
  cal.variant = parse_variant(field<std::string>(c, "variant", "two-step", "calibration"));
  cal.selection = field(c, "selection", cal.selection, "calibration");
  if (cal.selection != "fixed" && cal.selection != "snr")
    throw InputError("calibration.selection: must be \"fixed\" or \"snr\"");
  cal.timesteps = field(c, "timesteps", cal.timesteps, "calibration");
  cal.sigmas = field(c, "sigmas", cal.sigmas, "calibration");
  cal.retention = field(c, "retention", cal.retention, "calibration");
  cal.early_step = field(c, "early_step", cal.early_step, "calibration");
  if (c.contains("bandwidth")) {
    const json& b = c.at("bandwidth");
    cal.bandwidth = b.is_number() ? parse_bandwidth_rule(b.dump()) : parse_bandwidth_rule(b.get<std::string>());
  }

  const json& e = block(root, "eval");
  reject_unknown(e, {"alpha", "split", "ablate_timesteps", "ablate_sigmas"}, "eval");
  cfg.eval.alpha = field(e, "alpha", cfg.eval.alpha, "eval");
  cfg.eval.split = field(e, "split", cfg.eval.split, "eval");
  cfg.eval.ablate_timesteps = field(e, "ablate_timesteps", cfg.eval.ablate_timesteps, "eval");
  cfg.eval.ablate_sigmas = field(e, "ablate_sigmas", cfg.eval.ablate_sigmas, "eval");
  if (!(cfg.eval.split > 0.0 && cfg.eval.split < 1.0)) throw InputError("eval.split: must lie in (0, 1)");
  if (!(cfg.eval.alpha > 0.0 && cfg.eval.alpha < 1.0)) throw InputError("eval.alpha: must lie in (0, 1)");
  return cfg;
}

ProjectConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  const auto bytes = read_file_bytes(path);
  json root = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (root.is_discarded()) throw InputError(path + ": not valid JSON");
  for (const auto& o : overrides) apply_override(root, o);
  return parse_config(root);
}

DatasetSpec parse_dataset_spec(const json& j) {
  if (!j.is_object()) throw InputError("spec: must be a JSON object");
  reject_unknown(j, {"kind", "dim", "size", "seed", "mean", "scale", "means", "scales", "weights", "radius", "shift",
                     "components", "spread", "layout_seed", "pair"},
                 "");
  if (!j.contains("kind")) throw InputError("kind: missing");
  DatasetSpec s;
  s.kind = parse_dataset_kind(field<std::string>(j, "kind", "", "spec"));
  s.dim = field(j, "dim", s.dim, "spec");
  s.size = field(j, "size", s.size, "spec");
  s.seed = field(j, "seed", s.seed, "spec");
  if (j.contains("mean") && j.at("mean").is_number())
    s.mean.assign(s.dim, j.at("mean").get<double>());
  else
    s.mean = field(j, "mean", s.mean, "spec");
  s.scale = field(j, "scale", s.scale, "spec");
  s.means = field(j, "means", s.means, "spec");
  s.scales = field(j, "scales", s.scales, "spec");
  s.weights = field(j, "weights", s.weights, "spec");
  s.radius = field(j, "radius", s.radius, "spec");
  s.shift = field(j, "shift", s.shift, "spec");
  s.components = field(j, "components", s.components, "spec");
  s.spread = field(j, "spread", s.spread, "spec");
  s.layout_seed = field(j, "layout_seed", s.layout_seed, "spec");
  s.validate();
  return s;
}

}  // namespace scoped::cli
