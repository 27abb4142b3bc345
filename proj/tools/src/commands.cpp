#include "scoped_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "scoped/bytes.hpp"
#include "scoped/calibration.hpp"
#include "scoped/datagen.hpp"
#include "scoped/dsm.hpp"
#include "scoped/errors.hpp"
#include "scoped/evaluation.hpp"
#include "scoped/mlp.hpp"
#include "scoped/model_io.hpp"
#include "scoped/parallel.hpp"
#include "scoped/typicality.hpp"

namespace scoped::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError(path + ": cannot open for writing");
  f << std::setprecision(17);
  return f;
}

json read_json(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  json j = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded()) throw InputError(path + ": not valid JSON");
  return j;
}

std::string level_json_name(const NoiseLevel& lv) { return lv.label(); }

// Options every command shares.
struct Common {
  std::size_t threads = 0;
  std::vector<std::string> overrides;

  std::size_t workers() const { return threads > 0 ? threads : default_workers(); }
};

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::string spec;
  std::string out;
  std::string pair;
  std::string out_ood;
};

int cmd_gen(const GenArgs& a, const Common& c, std::ostream& out) {
  const json j = read_json(a.spec);
  const DatasetSpec spec = parse_dataset_spec(j);
  if (a.pair.empty()) {
    const Dataset data = generate(spec, c.workers());
    save_dataset(data, a.out);
    out << "wrote " << data.rows() << " x " << data.dim << " to " << a.out << '\n';
    return kExitOk;
  }
  if (a.out_ood.empty()) throw InputError("--pair needs --out-ood");
  const TaskPairSpecs specs = task_pair_specs(parse_shift_kind(a.pair), spec);
  const Dataset id = generate(specs.id, c.workers());
  const Dataset ood = generate(specs.ood, c.workers());
  save_dataset(id, a.out);
  save_dataset(ood, a.out_ood);
  out << "wrote " << id.rows() << " x " << id.dim << " to " << a.out << " and " << ood.rows() << " x "
      << ood.dim << " to " << a.out_ood << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out;
  std::string loss;
};

int cmd_train(const TrainArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  const ProjectConfig cfg = load_config(a.config, c.overrides);
  const Dataset data = load_dataset(a.data);
  if (cfg.model.activation == Activation::kRelu)
    err << "warning: relu makes the score Jacobian piecewise constant, so curvature carries little signal\n";
  const NoiseSchedule schedule = cfg.schedule();
  MlpDenoiser init = MlpDenoiser::create(data.dim, cfg.model, cfg.seed);
  TrainResult result =
      train_dsm(std::move(init), data, cfg.is_continuous() ? nullptr : &schedule, cfg.train);
  save_model(result.model, a.out);
  const std::string loss_path = a.loss.empty() ? a.out + ".loss.csv" : a.loss;
  auto f = open_output(loss_path);
  f << "epoch,loss\n";
  for (std::size_t i = 0; i < result.loss_trace.size(); ++i) f << i + 1 << ',' << result.loss_trace[i] << '\n';
  if (!result.loss_trace.empty())
    out << "trained " << result.model.params().size() << " parameters, loss " << result.loss_trace.front()
        << " -> " << result.loss_trace.back() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- snr

struct SnrArgs {
  std::string config;
  std::string data;
  std::string model;
  std::string out;
  int stride = 1;
};

int cmd_snr(const SnrArgs& a, const Common& c, std::ostream& out) {
  const ProjectConfig cfg = load_config(a.config, c.overrides);
  if (cfg.is_continuous()) {
    out << "sigma_mode=" << std::setprecision(6) << sigma_mode(*cfg.continuous) << '\n';
    return kExitOk;
  }
  Dataset data = load_dataset(a.data);
  if (!a.model.empty()) data = to_model_space(*load_model(a.model), data);
  const NoiseSchedule schedule = cfg.schedule();
  const SnrCurve curve = snr_curve(data.values, data.dim, schedule, all_steps(schedule, a.stride));
  if (!a.out.empty()) {
    auto f = open_output(a.out);
    write_snr_csv(f, curve);
  }
  const MidStepSelection mid = select_mid_step(curve, cfg.calibration.retention);
  out << "early_step=" << cfg.calibration.early_step << " mid_step=" << mid.step << '\n';
  if (mid.fallback) out << "warning: no step retains " << cfg.calibration.retention << " of the signal\n";
  return kExitOk;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string config;
  std::string model;
  std::string data;
  std::string out;
};

CalibrationArtifact calibrate_from_config(const ProjectConfig& cfg, const ScoreModel& model, const Dataset& data,
                                          std::size_t workers, const TypicalityConfig& typ) {
  const auto levels = resolve_levels(cfg, to_model_space(model, data));
  CalibrationOptions opts;
  opts.variant = cfg.calibration.variant;
  opts.bandwidth = cfg.calibration.bandwidth;
  opts.workers = workers;
  return calibrate(model, data, levels, cfg.schedule_fingerprint(), typ, opts);
}

int cmd_calibrate(const CalibrateArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  const ProjectConfig cfg = load_config(a.config, c.overrides);
  const auto model = load_model(a.model);
  const Dataset data = load_dataset(a.data);
  const CalibrationArtifact art = calibrate_from_config(cfg, *model, data, c.workers(), cfg.typicality);
  if (art.excluded_samples > 0) err << "warning: excluded " << art.excluded_samples << " samples with failed scores\n";
  save_artifact(art, a.out);
  out << "calibrated " << to_string(art.variant) << " at";
  for (const auto& lv : art.levels) out << ' ' << lv.label();
  out << " on " << data.rows() - art.excluded_samples << " samples\n";
  return kExitOk;
}

// ---------------------------------------------------------------- score

struct ScoreArgs {
  std::string artifact;
  std::string model;
  std::string data;
  std::string out;
  std::string config;
  std::string stats;
  std::optional<double> alpha;
};

int cmd_score(const ScoreArgs& a, const Common& c, std::ostream& out) {
  const CalibrationArtifact art = load_artifact(a.artifact);
  const auto model = load_model(a.model);
  std::optional<std::uint64_t> schedule_fp;
  if (!a.config.empty()) schedule_fp = load_config(a.config, c.overrides).schedule_fingerprint();
  check_compatible(art, *model, schedule_fp);
  const Dataset data = load_dataset(a.data);
  if (data.dim != model->dim()) throw ConsistencyError(a.data + ": dimension differs from the model's");

  const std::size_t L = art.levels.size();
  const auto stats = score_batch(*model, data, art.levels, art.typicality, Domain::kScore, c.workers());
  if (!a.stats.empty()) {
    auto f = open_output(a.stats);
    write_typicality_csv(f, stats, L);
  }

  std::optional<double> cutoff;
  if (a.alpha) {
    if (!(*a.alpha > 0.0 && *a.alpha < 1.0)) throw InputError("--alpha: must lie in (0, 1)");
    const auto ref = id_reference_scores(art);
    cutoff = threshold_from_quantile(ref, *a.alpha);
  }

  auto f = open_output(a.out);
  f << "sample_index,score";
  for (const auto& lv : art.levels) f << ",nll_" << lv.label();
  for (const auto& lv : art.levels) f << ",t_" << lv.label();
  if (cutoff) f << ",verdict";
  f << '\n';
  std::size_t flagged = 0;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const AnomalyScore s = combine_levels(art, std::span(stats).subspan(i * L, L));
    failed += s.ok ? 0 : 1;
    f << i << ',' << s.value;
    for (double v : s.per_level) f << ',' << v;
    for (double v : s.t_values) f << ',' << v;
    if (cutoff) {
      const bool anomalous = !s.ok || s.value > *cutoff;
      flagged += anomalous ? 1 : 0;
      f << ',' << (anomalous ? 1 : 0);
    }
    f << '\n';
  }
  out << "scored " << data.rows() << " samples";
  if (failed > 0) out << " (" << failed << " failed)";
  if (cutoff) out << ", flagged " << flagged << " at cutoff " << std::setprecision(6) << *cutoff;
  out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string config;
  std::string manifest;
  std::string report;
  std::string matrix;
  bool ablate = false;
  bool no_sign = false;
};

struct Detector {
  std::string name;
  std::unique_ptr<ScoreModel> model;
  Dataset calibration;
  Dataset held_out;
  Dataset self_a;  // halves of the held-out split for the diagonal
  Dataset self_b;
  CalibrationArtifact artifact;
  std::optional<CalibrationArtifact> unsigned_artifact;
};

json level_to_json(const NoiseLevel& lv) {
  json j = {{"label", lv.label()}, {"sigma", lv.sigma}, {"signal_scale", lv.signal_scale}};
  if (!lv.continuous()) j["step"] = lv.step;
  return j;
}

void print_ablation(std::ostream& out, const AblationTable& t) {
  out << "ablation " << t.id_name << " -> " << t.ood_name << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& row : t.rows) {
    out << "  " << std::setw(10) << std::left << row.level.label() << std::right << ' ' << row.auroc;
    if (row.level == t.oracle.level) out << " *";
    out << '\n';
  }
  out << "  " << std::setw(10) << std::left << "oracle" << std::right << ' ' << t.oracle.auroc << " ("
      << t.oracle.level.label() << ")\n";
  out.unsetf(std::ios::floatfield);
}

int cmd_eval(const EvalArgs& a, const Common& c, std::ostream& out) {
  const ProjectConfig cfg = load_config(a.config, c.overrides);
  const std::size_t workers = c.workers();
  const json manifest = read_json(a.manifest);
  const fs::path base = fs::path(a.manifest).parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? p : (base / p).string(); };

  if (!manifest.contains("datasets") || !manifest.at("datasets").is_object())
    throw InputError("manifest.datasets: missing or not an object");
  if (!manifest.contains("detectors") || !manifest.at("detectors").is_object())
    throw InputError("manifest.detectors: missing or not an object");

  std::map<std::string, Dataset> datasets;
  std::vector<std::string> dataset_order;
  for (const auto& [name, path] : manifest.at("datasets").items()) {
    if (!path.is_string()) throw InputError("manifest.datasets." + name + ": expected a path");
    datasets.emplace(name, load_dataset(resolve(path.get<std::string>())));
    dataset_order.push_back(name);
  }
  std::vector<std::string> columns = dataset_order;
  if (manifest.contains("columns")) columns = manifest.at("columns").get<std::vector<std::string>>();
  for (const auto& col : columns)
    if (!datasets.count(col)) throw InputError("manifest.columns: unknown dataset \"" + col + "\"");

  TypicalityConfig unsigned_cfg = cfg.typicality;
  unsigned_cfg.apply_sign = false;

  std::vector<Detector> detectors;
  for (const auto& [name, d] : manifest.at("detectors").items()) {
    if (!datasets.count(name)) throw InputError("manifest.detectors." + name + ": no dataset of that name");
    if (!d.contains("model")) throw InputError("manifest.detectors." + name + ".model: missing");
    Detector det;
    det.name = name;
    det.model = load_model(resolve(d.at("model").get<std::string>()));
    Split split = split_dataset(datasets.at(name), cfg.eval.split, cfg.seed);
    det.calibration = std::move(split.first);
    det.held_out = std::move(split.second);
    if (det.held_out.rows() < 2 || det.calibration.rows() < 2)
      throw InputError("manifest.datasets." + name + ": too few rows for the eval split");
    const std::size_t half = det.held_out.rows() / 2;
    det.self_a = slice(det.held_out, 0, half);
    det.self_b = slice(det.held_out, half, det.held_out.rows());
    if (d.contains("artifact")) {
      det.artifact = load_artifact(resolve(d.at("artifact").get<std::string>()));
      check_compatible(det.artifact, *det.model, cfg.schedule_fingerprint());
    } else {
      det.artifact = calibrate_from_config(cfg, *det.model, det.calibration, workers, cfg.typicality);
    }
    if (a.no_sign) {
      auto art = det.artifact;
      CalibrationOptions opts;
      opts.variant = art.variant;
      opts.bandwidth = cfg.calibration.bandwidth;
      opts.workers = workers;
      det.unsigned_artifact =
          calibrate(*det.model, det.calibration, art.levels, art.schedule_fingerprint, unsigned_cfg, opts);
    }
    detectors.push_back(std::move(det));
  }

  const bool oracle = cfg.calibration.variant == Variant::kOracle;
  const bool sweep = oracle || a.ablate;
  const auto sweep_levels = sweep ? ablation_levels(cfg) : std::vector<NoiseLevel>{};

  EvalReport report;
  report.variant = cfg.calibration.variant;
  report.seed = cfg.seed;
  report.nfe = nfe_account(cfg.calibration.variant, cfg.typicality);
  json pair_extras = json::array();
  std::uint64_t scored = 0;
  std::uint64_t forwards = 0;
  std::uint64_t jvps = 0;

  for (const auto& det : detectors) {
    CountingScoreModel counted(*det.model);
    for (const auto& col : columns) {
      const bool diagonal = col == det.name;
      const Dataset& id_data = diagonal ? det.self_a : det.held_out;
      const Dataset& ood_data = diagonal ? det.self_b : datasets.at(col);
      json extra = json::object();

      if (sweep && !diagonal) {
        AblationInputs in{det.model.get(), &det.calibration, &det.held_out, &ood_data,
                          det.artifact.schedule_fingerprint};
        AblationTable table{det.name, col,
                            ablate_timesteps(in, sweep_levels, cfg.typicality, cfg.calibration.bandwidth, workers),
                            {}};
        table.oracle = oracle_timestep(table.rows);
        if (a.ablate) print_ablation(out, table);
        report.ablations.push_back(std::move(table));
      }

      PairResult result;
      if (oracle && !diagonal) {
        const auto& table = report.ablations.back();
        result.id_name = det.name;
        result.ood_name = col;
        result.auroc = table.oracle.auroc;
        result.n_id = id_data.rows();
        result.n_ood = ood_data.rows();
        extra["oracle_level"] = level_to_json(table.oracle.level);
      } else {
        counted.reset();
        PairSpec spec{det.name, col, &id_data, &ood_data, &counted, &det.artifact};
        result = evaluate_pair(spec, workers);
        scored += result.n_id + result.n_ood;
        forwards += counted.forwards();
        jvps += counted.jvps();
      }

      if (det.unsigned_artifact) {
        PairSpec spec{det.name, col, &id_data, &ood_data, det.model.get(), &*det.unsigned_artifact};
        result.auroc_no_sign = evaluate_pair(spec, workers).auroc;
        // Samples whose statistic changes once the sign factor is dropped.
        const auto signed_scores = score_dataset(det.artifact, *det.model, id_data, workers);
        const auto raw_scores = score_dataset(*det.unsigned_artifact, *det.model, id_data, workers);
        std::size_t changed = 0;
        for (std::size_t i = 0; i < signed_scores.size(); ++i)
          changed += signed_scores[i].t_values != raw_scores[i].t_values ? 1 : 0;
        extra["sign_changed_samples"] = changed;
      }
      report.pairs.push_back(result);
      pair_extras.push_back(std::move(extra));
    }
  }

  json pairs = json::array();
  for (std::size_t i = 0; i < report.pairs.size(); ++i) {
    const auto& p = report.pairs[i];
    json j = {{"id", p.id_name},     {"ood", p.ood_name},   {"auroc", p.auroc},
              {"n_id", p.n_id},      {"n_ood", p.n_ood},    {"floor_ties", p.floor_ties}};
    if (p.auroc_no_sign) j["auroc_no_sign"] = *p.auroc_no_sign;
    j.update(pair_extras[i]);
    pairs.push_back(std::move(j));
  }
  json ablations = json::array();
  for (const auto& t : report.ablations) {
    json rows = json::array();
    for (const auto& r : t.rows) {
      json row = level_to_json(r.level);
      row["auroc"] = r.auroc;
      rows.push_back(std::move(row));
    }
    json orc = level_to_json(t.oracle.level);
    orc["auroc"] = t.oracle.auroc;
    ablations.push_back({{"id", t.id_name}, {"ood", t.ood_name}, {"rows", rows}, {"oracle", orc}});
  }
  json nfe = {{"forward", report.nfe.forward}, {"jvp", report.nfe.jvp}};
  if (scored > 0)
    nfe["measured"] = {{"forward", static_cast<double>(forwards) / static_cast<double>(scored)},
                       {"jvp", static_cast<double>(jvps) / static_cast<double>(scored)}};
  const json doc = {{"variant", std::string(to_string(report.variant))},
                    {"seed", report.seed},
                    {"nfe", nfe},
                    {"pairs", pairs},
                    {"ablations", ablations},
                    {"config", cfg.snapshot}};
  {
    auto f = open_output(a.report);
    f << doc.dump(2) << '\n';
  }
  std::vector<std::string> rows;
  for (const auto& det : detectors) rows.push_back(det.name);
  {
    auto f = open_output(a.matrix);
    write_matrix_csv(f, report, rows, columns);
  }
  out << std::fixed << std::setprecision(4);
  for (const auto& p : report.pairs) {
    out << p.id_name << " -> " << p.ood_name << ": auroc " << p.auroc;
    if (p.auroc_no_sign) out << " (no sign " << *p.auroc_no_sign << ")";
    out << '\n';
  }
  out.unsetf(std::ios::floatfield);
  return kExitOk;
}

}  // namespace

Dataset to_model_space(const ScoreModel& model, const Dataset& data) {
  Dataset out;
  out.dim = data.dim;
  out.values.reserve(data.values.size());
  for (std::size_t i = 0; i < data.rows(); ++i) out.append(model.to_model_space(data.row(i)));
  return out;
}

std::vector<NoiseLevel> resolve_levels(const ProjectConfig& cfg, const Dataset& model_space_points) {
  const auto& cal = cfg.calibration;
  const std::size_t wanted = cal.variant == Variant::kTwoStep ? 2 : 1;
  std::vector<NoiseLevel> levels;
  if (cfg.is_continuous()) {
    if (cal.sigmas.empty()) {
      if (wanted != 1) throw InputError("calibration.sigmas: the two-step variant needs two sigmas");
      levels.push_back(continuous_level(sigma_mode(*cfg.continuous)));
    } else {
      for (double s : cal.sigmas) levels.push_back(continuous_level(s));
    }
  } else {
    const NoiseSchedule schedule = cfg.schedule();
    if (cal.selection == "snr") {
      const SnrCurve curve = snr_curve(model_space_points.values, model_space_points.dim, schedule,
                                       all_steps(schedule));
      const MidStepSelection mid = select_mid_step(curve, cal.retention);
      if (wanted == 2) levels.push_back(level_at(schedule, cal.early_step));
      levels.push_back(level_at(schedule, mid.step));
    } else {
      for (int t : cal.timesteps) levels.push_back(level_at(schedule, t));
    }
  }
  if (levels.size() != wanted)
    throw InputError(std::string("calibration: variant ") + std::string(to_string(cal.variant)) + " needs " +
                     std::to_string(wanted) + " level(s), got " + std::to_string(levels.size()));
  return levels;
}

std::vector<NoiseLevel> ablation_levels(const ProjectConfig& cfg) {
  std::vector<NoiseLevel> levels;
  if (cfg.is_continuous()) {
    std::vector<double> sigmas = cfg.eval.ablate_sigmas;
    if (sigmas.empty()) sigmas = {0.01, 0.03, sigma_mode(*cfg.continuous), 0.3, 1.0};
    for (double s : sigmas) levels.push_back(continuous_level(s));
  } else {
    const NoiseSchedule schedule = cfg.schedule();
    for (int t : cfg.eval.ablate_timesteps) levels.push_back(level_at(schedule, t));
  }
  if (levels.empty()) throw InputError("eval: the ablation sweep has no levels");
  return levels;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Score-based typicality anomaly detection"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--threads", common.threads, "Worker threads (default: SCOPED_THREADS or all cores)");

  auto add_set = [&](CLI::App* sub) {
    sub->add_option("--set", common.overrides, "Config override key=value (repeatable)");
  };

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic dataset");
  g->add_option("--spec", gen.spec, "Dataset spec JSON")->required();
  g->add_option("--out", gen.out, "Output dataset (.csv or SDAT)")->required();
  g->add_option("--pair", gen.pair, "Emit a task pair: reward-shift, policy-shift or seed-shift");
  g->add_option("--out-ood", gen.out_ood, "Second dataset of the pair");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a score model by denoising score matching");
  t->add_option("--config", train.config)->required();
  t->add_option("--data", train.data)->required();
  t->add_option("--out", train.out, "Model file")->required();
  t->add_option("--loss", train.loss, "Loss trace CSV (default: <out>.loss.csv)");
  add_set(t);

  SnrArgs snr;
  auto* s = app.add_subcommand("snr", "Trace the retained-signal curve and pick timesteps");
  s->add_option("--config", snr.config)->required();
  s->add_option("--data", snr.data);
  s->add_option("--model", snr.model, "Scan in this model's coordinates");
  s->add_option("--out", snr.out, "Curve CSV");
  s->add_option("--stride", snr.stride)->check(CLI::PositiveNumber);
  add_set(s);

  CalibrateArgs cal;
  auto* ca = app.add_subcommand("calibrate", "Fit the per-level KDEs on in-distribution data");
  ca->add_option("--config", cal.config)->required();
  ca->add_option("--model", cal.model)->required();
  ca->add_option("--data", cal.data)->required();
  ca->add_option("--out", cal.out, "Artifact file")->required();
  add_set(ca);

  ScoreArgs score;
  auto* sc = app.add_subcommand("score", "Score samples against a calibration artifact");
  sc->add_option("--artifact", score.artifact)->required();
  sc->add_option("--model", score.model)->required();
  sc->add_option("--data", score.data)->required();
  sc->add_option("--out", score.out, "Per-sample score CSV")->required();
  sc->add_option("--alpha", score.alpha, "False-positive rate; adds a verdict column");
  sc->add_option("--config", score.config, "Also check the schedule fingerprint");
  sc->add_option("--stats", score.stats, "Raw per-level statistics CSV");
  add_set(sc);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "AUROC matrix over a manifest of datasets and detectors");
  e->add_option("--config", ev.config)->required();
  e->add_option("--manifest", ev.manifest)->required();
  e->add_option("--report", ev.report, "Report JSON")->required();
  e->add_option("--matrix", ev.matrix, "Matrix CSV")->required();
  e->add_flag("--ablate", ev.ablate, "Per-level AUROC sweep with an oracle row");
  e->add_flag("--no-sign", ev.no_sign, "Also evaluate without the sign factor");
  add_set(e);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    if (ex.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << ex.what() << '\n';
    return kExitInput;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, common, out);
    if (t->parsed()) return cmd_train(train, common, out, err);
    if (s->parsed()) {
      if (snr.data.empty() && !load_config(snr.config, common.overrides).is_continuous())
        throw InputError("--data: required for a discrete schedule");
      return cmd_snr(snr, common, out);
    }
    if (ca->parsed()) return cmd_calibrate(cal, common, out, err);
    if (sc->parsed()) return cmd_score(score, common, out);
    if (e->parsed()) return cmd_eval(ev, common, out);
  } catch (const InputError& ex) {
    err << "input error: " << ex.what() << '\n';
    return kExitInput;
  } catch (const ConsistencyError& ex) {
    err << "consistency error: " << ex.what() << '\n';
    return kExitConsistency;
  } catch (const NumericError& ex) {
    err << "numeric error: " << ex.what() << '\n';
    return kExitNumeric;
  } catch (const nlohmann::json::exception& ex) {
    err << "input error: " << ex.what() << '\n';
    return kExitInput;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return 1;
  }
  return kExitInput;
}

}  // namespace scoped::cli
