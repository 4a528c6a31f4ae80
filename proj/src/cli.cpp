#include "driftkan/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "driftkan/config.hpp"
#include "driftkan/error.hpp"
#include "driftkan/metrics.hpp"
#include "driftkan/serialize.hpp"

namespace driftkan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFiniteLoss:
      return kExitNumeric;
    case ErrorCode::TooFewPatches:
    case ErrorCode::UnknownConcept:
    case ErrorCode::EmptySegments:
    case ErrorCode::EmptySequence:
    case ErrorCode::UnknownLabel:
    case ErrorCode::NoHistoryForConcept:
      return kExitDomain;
    default:
      return kExitUsage;
  }
}

// Flags are registered before the config file is known, so each one becomes a
// closure applied to the loaded config only when the flag was actually given.
class Overrides {
 public:
  template <typename T, typename Setter>
  CLI::Option* add(CLI::App* cmd, const std::string& name, const std::string& help, Setter setter) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = cmd->add_option(name, *value, help);
    appliers_.push_back([opt, value, setter](RunConfig& cfg) {
      if (opt->count() > 0) setter(cfg, *value);
    });
    return opt;
  }

  void apply(RunConfig& cfg) const {
    for (const auto& f : appliers_) f(cfg);
  }

 private:
  std::vector<std::function<void(RunConfig&)>> appliers_;
};

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  CLI::Option* seed = nullptr;
  Overrides overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "JSON run configuration");
  cmd->add_option("-o,--out", args.out_dir,
                  std::string("output directory (overrides $") + kOutputDirEnv + " and the config)");
  args.seed = args.overrides.add<std::uint64_t>(cmd, "--seed", "random seed", [](RunConfig& c, std::uint64_t s) {
    c.seed = s;
    c.train.seed = s;
    c.forecast.options.seed = s;
  });
}

void add_model_flags(CLI::App* cmd, Overrides& o) {
  o.add<std::size_t>(cmd, "-w,--patch-width", "patch width in time steps",
                     [](RunConfig& c, std::size_t v) { c.data.patch_width = v; });
  o.add<bool>(cmd, "--strict", "fail instead of dropping an incomplete tail patch",
              [](RunConfig& c, bool v) { c.data.strict = v; });
  o.add<std::vector<std::size_t>>(cmd, "--hidden", "encoder hidden widths",
                                  [](RunConfig& c, const std::vector<std::size_t>& v) { c.model.hidden = v; });
  o.add<std::size_t>(cmd, "--latent-dim", "latent width", [](RunConfig& c, std::size_t v) { c.model.latent_dim = v; });
  o.add<int>(cmd, "--grid-intervals", "spline grid intervals", [](RunConfig& c, int v) { c.model.grid.intervals = v; });
  o.add<int>(cmd, "--spline-order", "spline order", [](RunConfig& c, int v) { c.model.grid.order = v; });
  o.add<std::size_t>(cmd, "--epochs", "joint training epochs", [](RunConfig& c, std::size_t v) { c.train.epochs = v; });
  o.add<std::size_t>(cmd, "--pretrain-epochs", "autoencoder-only epochs before joint training",
                     [](RunConfig& c, std::size_t v) { c.train.pretrain_epochs = v; });
  o.add<std::size_t>(cmd, "--theta-epochs", "epochs fitting theta_s alone on the frozen latent codes",
                     [](RunConfig& c, std::size_t v) { c.train.theta_epochs = v; });
  o.add<double>(cmd, "--lr", "Adam learning rate", [](RunConfig& c, double v) { c.train.learning_rate = v; });
  o.add<double>(cmd, "--theta-lr", "Adam learning rate for theta_s (0 reuses --lr)",
                [](RunConfig& c, double v) { c.train.theta_learning_rate = v; });
  o.add<double>(cmd, "--lambda-sparsity", "weight of the sparsity penalty",
                [](RunConfig& c, double v) { c.train.weights.sparsity = v; });
  o.add<double>(cmd, "--lambda-selfrep", "weight of the latent self-representation residual",
                [](RunConfig& c, double v) { c.train.weights.selfrep = v; });
  o.add<double>(cmd, "--lambda-smooth", "weight of the column-difference group penalty",
                [](RunConfig& c, double v) { c.train.weights.smoothness = v; });
  o.add<double>(cmd, "--tolerance", "relative improvement counted as progress",
                [](RunConfig& c, double v) { c.train.tolerance = v; });
  o.add<std::size_t>(cmd, "--patience", "epochs without progress before stopping",
                     [](RunConfig& c, std::size_t v) { c.train.patience = v; });
}

void add_segment_flags(CLI::App* cmd, Overrides& o) {
  o.add<int>(cmd, "-k,--concepts", "fixed concept count (eigengap when omitted)",
             [](RunConfig& c, int v) { c.segment.concepts = v; });
  o.add<double>(cmd, "--min-prominence", "peak prominence threshold",
                [](RunConfig& c, double v) { c.segment.peaks.min_prominence = v; });
  o.add<std::size_t>(cmd, "--min-distance", "minimum patch distance between boundaries",
                     [](RunConfig& c, std::size_t v) { c.segment.peaks.min_distance = v; });
}

RunConfig resolve_config(const CommonArgs& args, const std::optional<json>& fallback = std::nullopt) {
  RunConfig cfg;
  if (!args.config_path.empty())
    cfg = load_config(args.config_path);
  else if (fallback)
    cfg = config_from_json(*fallback);
  apply_environment(cfg);
  args.overrides.apply(cfg);
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  validate(cfg);
  return cfg;
}

fs::path output_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.output_dir);
  return fs::path(cfg.output_dir) / name;
}

std::ofstream open_text(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
  f.precision(17);
  return f;
}

struct Analysis {
  Matrix latent;
  BoundaryScores scores;
  Segmentation segmentation;
  ConceptMap concepts;
};

Analysis analyze(const io::Checkpoint& ck, const RunConfig& cfg) {
  Analysis a;
  a.latent = encode(ck.model, ck.patches.data);
  a.scores = boundary_scores(ck.model.theta_s, difference_matrix(ck.patches.n));
  a.segmentation = detect_boundaries(a.scores, cfg.segment.peaks);
  a.concepts = cluster_segments(a.segmentation, a.latent, ck.model.theta_s, cfg.segment.concepts);
  return a;
}

io::Checkpoint load_checkpoint(const std::string& path) { return io::checkpoint_from_json(io::read_json_file(path)); }

std::string checkpoint_path(const std::string& flag, const CommonArgs& args) {
  if (!flag.empty()) return flag;
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = load_config(args.config_path);
  apply_environment(cfg);
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  return (fs::path(cfg.output_dir) / "checkpoint.json").string();
}

// ---- commands ---------------------------------------------------------------

void cmd_synth(const CommonArgs& args, std::ostream& out) {
  const RunConfig cfg = resolve_config(args);
  if (!cfg.synth) throw Error(ErrorCode::InvalidSpec, "config has no 'synth' section");
  SyntheticSpec spec = io::synthetic_spec_from_json(*cfg.synth, cfg.seed);
  if (args.seed->count() > 0) spec.seed = cfg.seed;
  validate(spec);  // before any file is created
  auto [series, truth] = generate_synthetic(spec);

  const auto csv = output_path(cfg, "series.csv");
  save_csv(csv.string(), series);
  json doc = io::to_json(truth);
  doc["format"] = "driftkan-truth";
  doc["version"] = io::kFormatVersion;
  doc["length"] = spec.length;
  doc["channels"] = spec.channels;
  doc["spec"] = io::to_json(spec);
  doc["config"] = to_json(cfg);
  const auto truth_path = output_path(cfg, "truth.json");
  io::write_json_file(truth_path.string(), doc);
  out << "wrote " << csv.string() << " and " << truth_path.string() << '\n';
}

void cmd_train(const CommonArgs& args, const std::string& input_flag, std::ostream& out) {
  RunConfig cfg = resolve_config(args);
  if (!input_flag.empty()) cfg.data.input = input_flag;
  const std::string input =
      cfg.data.input.empty() ? (fs::path(cfg.output_dir) / "series.csv").string() : cfg.data.input;

  const SeriesMatrix series = load_csv(input, cfg.data.has_header, cfg.data.timestamp_column);
  const PatchSet patches = normalize_patches(patchify(series, cfg.data.patch_width, cfg.data.strict));
  auto [model, report] = train(patches, cfg.train, cfg.model);

  io::Checkpoint ck{std::move(model), patches, to_json(cfg)};
  const auto ck_path = output_path(cfg, "checkpoint.json");
  io::write_json_file(ck_path.string(), io::to_json(ck), -1);

  json rep = io::to_json(report);
  rep["input"] = input;
  rep["config"] = to_json(cfg);
  io::write_json_file(output_path(cfg, "train_report.json").string(), rep);

  auto trace = open_text(output_path(cfg, "loss_trace.csv"));
  trace << "epoch,total,reconstruction,sparsity,selfrep,smoothness\n";
  for (std::size_t e = 0; e < report.trace.size(); ++e) {
    const auto& c = report.trace[e];
    trace << e << ',' << c.total << ',' << c.reconstruction << ',' << c.sparsity << ',' << c.selfrep << ','
          << c.smoothness << '\n';
  }
  out << "trained " << report.trace.size() << " epochs on " << patches.n << " patches; final loss "
      << (report.trace.empty() ? 0.0 : report.trace.back().total) << "; wrote " << ck_path.string() << '\n';
}

void cmd_segment(const CommonArgs& args, const std::string& ck_flag, std::ostream& out) {
  const io::Checkpoint ck = load_checkpoint(checkpoint_path(ck_flag, args));
  const RunConfig cfg = resolve_config(args, ck.config);
  const Analysis a = analyze(ck, cfg);

  json doc = io::concept_map_json(a.segmentation, a.concepts, ck.patches.w);
  doc["mu_b"] = std::vector<double>(a.scores.mu_b.data(), a.scores.mu_b.data() + a.scores.mu_b.size());
  doc["config"] = to_json(cfg);
  const auto path = output_path(cfg, "segmentation.json");
  io::write_json_file(path.string(), doc);

  auto csv = open_text(output_path(cfg, "mu_b.csv"));
  csv << "boundary_after_patch,mu_b\n";
  for (Eigen::Index j = 0; j < a.scores.mu_b.size(); ++j) csv << (j + 1) << ',' << a.scores.mu_b(j) << '\n';

  out << a.segmentation.boundaries.size() << " boundaries, " << a.concepts.k << " concepts; wrote " << path.string()
      << '\n';
}

void cmd_drift(const CommonArgs& args, const std::string& ck_flag, const std::string& input, std::ostream& out) {
  const io::Checkpoint ck = load_checkpoint(checkpoint_path(ck_flag, args));
  const RunConfig cfg = resolve_config(args, ck.config);
  const Analysis a = analyze(ck, cfg);

  Matrix latent = a.latent;
  const bool training_data = input.empty();
  if (!training_data) {
    const SeriesMatrix series = load_csv(input, cfg.data.has_header, cfg.data.timestamp_column);
    if (series.channels() != ck.patches.channels)
      throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(series.channels()) +
                                                    " channels, model expects " + std::to_string(ck.patches.channels));
    latent = encode(ck.model, normalize_patches(patchify(series, ck.patches.w, false)).data);
  }

  json events = json::array();
  if (training_data) {
    for (std::size_t j : a.segmentation.boundaries)
      events.push_back({{"kind", "boundary"},
                        {"patch", j},
                        {"from", a.concepts.patch_labels[j - 1]},
                        {"to", a.concepts.patch_labels[j]},
                        {"score", a.scores.mu_b(static_cast<Eigen::Index>(j - 1))}});
  }
  int current = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int c = 0; c < a.concepts.k; ++c) {
    const double d = (latent.row(0).transpose() - a.concepts.prototypes[static_cast<std::size_t>(c)]).norm();
    if (d < best) best = d, current = c;
  }
  for (Eigen::Index t = 0; t < latent.rows(); ++t) {
    if (auto ev = drift_monitor(a.concepts, latent.row(t).transpose(), current, static_cast<std::size_t>(t))) {
      events.push_back({{"kind", "prototype"}, {"patch", ev->patch}, {"from", ev->from_concept}, {"to", ev->to_concept}, {"score", ev->score}});
      current = ev->to_concept;
    }
  }

  json doc{{"format", "driftkan-drift"},
           {"version", io::kFormatVersion},
           {"source", training_data ? "training" : input},
           {"patches", latent.rows()},
           {"initial_concept", a.concepts.patch_labels.empty() ? 0 : a.concepts.patch_labels.front()},
           {"events", events},
           {"config", to_json(cfg)}};
  const auto path = output_path(cfg, "drift.json");
  io::write_json_file(path.string(), doc);
  out << events.size() << " drift events; wrote " << path.string() << '\n';
}

void cmd_forecast(const CommonArgs& args, const std::string& ck_flag, std::ostream& out) {
  const io::Checkpoint ck = load_checkpoint(checkpoint_path(ck_flag, args));
  const RunConfig cfg = resolve_config(args, ck.config);
  const Analysis a = analyze(ck, cfg);

  ForecastBundle bundle;
  bundle.history = ck.patches;
  bundle.patch_labels = a.concepts.patch_labels;
  bundle.transitions = fit_concept_transitions(run_labels(a.concepts.patch_labels));
  bundle.current_concept = a.concepts.patch_labels.back();
  const HorizonForecast fc = forecast_horizon(bundle, cfg.forecast.horizon, cfg.forecast.options);

  json doc = io::to_json(fc);
  doc["w"] = ck.patches.w;
  doc["channels"] = ck.patches.channels;
  doc["current_concept"] = bundle.current_concept;
  doc["config"] = to_json(cfg);
  const auto path = output_path(cfg, "forecast.json");
  io::write_json_file(path.string(), doc);

  auto csv = open_text(output_path(cfg, "forecast.csv"));
  csv << "step,offset,concept";
  for (std::size_t c = 0; c < ck.patches.channels; ++c) csv << ",c" << c;
  csv << '\n';
  for (std::size_t s = 0; s < fc.steps.size(); ++s) {
    const Matrix& m = fc.steps[s].denormalized;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      csv << s << ',' << r << ',' << fc.concepts[s];
      for (Eigen::Index c = 0; c < m.cols(); ++c) csv << ',' << m(r, c);
      csv << '\n';
    }
  }
  out << "forecast " << fc.steps.size() << " patches; wrote " << path.string() << '\n';
}

struct EvalArgs {
  std::string pred;
  std::string truth;
  std::string forecast;
  std::string actual;
  std::size_t actual_start = 0;
};

void cmd_eval(const CommonArgs& args, const EvalArgs& ea, std::ostream& out) {
  const RunConfig cfg = resolve_config(args);
  EvalReport report;
  report.tolerance = cfg.eval_tolerance;
  json doc;

  if (!ea.pred.empty() || !ea.truth.empty()) {
    if (ea.pred.empty() || ea.truth.empty()) throw Error(ErrorCode::InvalidConfig, "--pred and --truth go together");
    const auto pred = io::segmentation_from_json(io::read_json_file(ea.pred));
    const json truth_doc = io::read_json_file(ea.truth);
    const GroundTruth truth = io::ground_truth_from_json(truth_doc);
    const std::size_t n = pred.segmentation.n;
    const auto truth_bounds = patch_boundaries_from_steps(truth.boundaries, pred.w, n);
    report.boundary = boundary_f1(truth_bounds, pred.segmentation.boundaries, cfg.eval_tolerance);
    report.ari = adjusted_rand_index(patch_labels_from_steps(truth.labels, pred.w, n), pred.concepts.patch_labels);
    doc["truth_boundaries"] = truth_bounds;
    doc["predicted_boundaries"] = pred.segmentation.boundaries;
  }

  if (!ea.forecast.empty()) {
    if (ea.actual.empty()) throw Error(ErrorCode::InvalidConfig, "--forecast needs --actual");
    const json fc = io::read_json_file(ea.forecast);
    if (fc.value("format", "") != "driftkan-forecast") throw Error(ErrorCode::InvalidFormat, "not a forecast document");
    const std::size_t w = fc.at("w").get<std::size_t>();
    const std::size_t channels = fc.at("channels").get<std::size_t>();
    const Matrix flat = io::matrix_from_json(fc.at("patches"));
    const SeriesMatrix actual = load_csv(ea.actual, cfg.data.has_header, cfg.data.timestamp_column);
    const std::size_t rows = static_cast<std::size_t>(flat.rows()) * w;
    if (actual.channels() != channels || ea.actual_start + rows > actual.length())
      throw Error(ErrorCode::LengthMismatch, "actual series does not cover the forecast window");
    Matrix predicted(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(channels));
    for (Eigen::Index s = 0; s < flat.rows(); ++s)
      for (std::size_t r = 0; r < w; ++r)
        for (std::size_t c = 0; c < channels; ++c)
          predicted(static_cast<Eigen::Index>(s * w + r), static_cast<Eigen::Index>(c)) =
              flat(s, static_cast<Eigen::Index>(r * channels + c));
    report.rmse = rmse(actual.values.middleRows(static_cast<Eigen::Index>(ea.actual_start),
                                                static_cast<Eigen::Index>(rows)),
                       predicted);
  }
  if (!report.boundary && !report.rmse) throw Error(ErrorCode::InvalidConfig, "nothing to evaluate");

  json rep = io::to_json(report);
  rep.update(doc);
  rep["config"] = to_json(cfg);
  const auto path = output_path(cfg, "eval.json");
  io::write_json_file(path.string(), rep);
  json summary = io::to_json(report);
  summary.erase("format");
  summary.erase("version");
  out << summary.dump() << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Concept-drift segmentation and forecasting for co-evolving time series", "driftkan"};
  app.require_subcommand(1);
  app.footer(std::string("Environment: $") + kOutputDirEnv + " overrides the configured output directory.\n"
             "Exit codes: 0 ok, 2 usage/config, 3 numeric failure, 4 domain precondition.");

  CommonArgs synth_args, train_args, segment_args, drift_args, forecast_args, eval_args;
  std::string train_input, checkpoint, drift_input;
  EvalArgs ea;

  auto* synth = app.add_subcommand("synth", "generate a synthetic regime-switching series with ground truth");
  add_common(synth, synth_args);

  auto* train_cmd = app.add_subcommand("train", "train the encoder, decoder and self-representation matrix");
  add_common(train_cmd, train_args);
  train_cmd->add_option("-i,--input", train_input, "input CSV (default: config data.input or <out>/series.csv)");
  add_model_flags(train_cmd, train_args.overrides);

  auto* segment = app.add_subcommand("segment", "detect boundaries and cluster segments into concepts");
  add_common(segment, segment_args);
  segment->add_option("--checkpoint", checkpoint, "checkpoint JSON (default: <out>/checkpoint.json)");
  add_segment_flags(segment, segment_args.overrides);

  auto* drift = app.add_subcommand("drift", "report boundary crossings and prototype switches");
  add_common(drift, drift_args);
  drift->add_option("--checkpoint", checkpoint, "checkpoint JSON (default: <out>/checkpoint.json)");
  drift->add_option("-i,--input", drift_input, "CSV to monitor (default: the training patches)");
  add_segment_flags(drift, drift_args.overrides);

  auto* forecast = app.add_subcommand("forecast", "predict the next concepts and patches");
  add_common(forecast, forecast_args);
  forecast->add_option("--checkpoint", checkpoint, "checkpoint JSON (default: <out>/checkpoint.json)");
  add_segment_flags(forecast, forecast_args.overrides);
  auto& fo = forecast_args.overrides;
  fo.add<std::size_t>(forecast, "--horizon", "number of patches to forecast",
                      [](RunConfig& c, std::size_t v) { c.forecast.horizon = v; });
  fo.add<double>(forecast, "--gamma", "recency decay in (0, 1]", [](RunConfig& c, double v) { c.forecast.options.gamma = v; });
  fo.add<double>(forecast, "--noise-sigma", "Gaussian noise on next-concept probabilities",
                 [](RunConfig& c, double v) { c.forecast.options.noise_sigma = v; });

  auto* eval = app.add_subcommand("eval", "score a segmentation and/or a forecast against ground truth");
  add_common(eval, eval_args);
  eval->add_option("--pred", ea.pred, "segmentation JSON");
  eval->add_option("--truth", ea.truth, "ground-truth JSON written by synth");
  eval->add_option("--forecast", ea.forecast, "forecast JSON");
  eval->add_option("--actual", ea.actual, "CSV holding the true continuation");
  eval->add_option("--actual-start", ea.actual_start, "row of --actual where the forecast starts");
  eval_args.overrides.add<std::size_t>(eval, "--tolerance", "boundary match tolerance in patches",
                                       [](RunConfig& c, std::size_t v) { c.eval_tolerance = v; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth) cmd_synth(synth_args, out);
    else if (*train_cmd) cmd_train(train_args, train_input, out);
    else if (*segment) cmd_segment(segment_args, checkpoint, out);
    else if (*drift) cmd_drift(drift_args, checkpoint, drift_input, out);
    else if (*forecast) cmd_forecast(forecast_args, checkpoint, out);
    else if (*eval) cmd_eval(eval_args, ea, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed document: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace driftkan
