#include "driftkan/config.hpp"

#include <cstdlib>
#include <set>

#include "driftkan/error.hpp"
#include "driftkan/serialize.hpp"

namespace driftkan {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, where + " must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) throw Error(ErrorCode::InvalidConfig, "unknown key '" + item.key() + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config key '") + key + "': " + e.what());
  }
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
    return;
  }
  T value{};
  read(j, key, value);
  out = value;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

StatsPolicy policy_from(const std::string& s) {
  if (s == "last_of_concept") return StatsPolicy::LastOfConcept;
  if (s == "last_overall") return StatsPolicy::LastOverall;
  throw Error(ErrorCode::InvalidConfig, "unknown stats policy '" + s + "'");
}

const char* policy_name(StatsPolicy p) { return p == StatsPolicy::LastOfConcept ? "last_of_concept" : "last_overall"; }

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  reject_unknown(j, {"output_dir", "seed", "data", "synth", "model", "train", "segment", "forecast", "eval"}, "config");
  read(j, "output_dir", cfg.output_dir);
  read(j, "seed", cfg.seed);
  cfg.train.seed = cfg.seed;
  cfg.forecast.options.seed = cfg.seed;

  if (j.contains("data")) {
    const auto& d = j["data"];
    reject_unknown(d, {"input", "has_header", "timestamp_column", "patch_width", "strict"}, "data");
    read(d, "input", cfg.data.input);
    read(d, "has_header", cfg.data.has_header);
    read_optional(d, "timestamp_column", cfg.data.timestamp_column);
    read(d, "patch_width", cfg.data.patch_width);
    read(d, "strict", cfg.data.strict);
  }
  if (j.contains("synth")) cfg.synth = j["synth"];

  if (j.contains("model")) {
    const auto& m = j["model"];
    reject_unknown(m, {"hidden", "latent_dim", "grid"}, "model");
    read(m, "hidden", cfg.model.hidden);
    read(m, "latent_dim", cfg.model.latent_dim);
    if (m.contains("grid")) {
      const auto& g = m["grid"];
      reject_unknown(g, {"t_min", "t_max", "intervals", "order"}, "model.grid");
      read(g, "t_min", cfg.model.grid.t_min);
      read(g, "t_max", cfg.model.grid.t_max);
      read(g, "intervals", cfg.model.grid.intervals);
      read(g, "order", cfg.model.grid.order);
    }
  }

  if (j.contains("train")) {
    const auto& t = j["train"];
    reject_unknown(t,
                   {"epochs", "pretrain_epochs", "theta_epochs", "learning_rate", "theta_learning_rate", "beta1", "beta2", "adam_eps", "lambda1", "lambda2",
                    "lambda3", "eps_norm", "tolerance", "patience"},
                   "train");
    auto& tc = cfg.train;
    read(t, "epochs", tc.epochs);
    read(t, "pretrain_epochs", tc.pretrain_epochs);
    read(t, "theta_epochs", tc.theta_epochs);
    read(t, "learning_rate", tc.learning_rate);
    read(t, "theta_learning_rate", tc.theta_learning_rate);
    read(t, "beta1", tc.beta1);
    read(t, "beta2", tc.beta2);
    read(t, "adam_eps", tc.adam_eps);
    read(t, "lambda1", tc.weights.sparsity);
    read(t, "lambda2", tc.weights.selfrep);
    read(t, "lambda3", tc.weights.smoothness);
    read(t, "eps_norm", tc.eps_norm);
    read(t, "tolerance", tc.tolerance);
    read(t, "patience", tc.patience);
  }

  if (j.contains("segment")) {
    const auto& s = j["segment"];
    reject_unknown(s, {"min_prominence", "min_distance", "concepts"}, "segment");
    read_optional(s, "min_prominence", cfg.segment.peaks.min_prominence);
    read(s, "min_distance", cfg.segment.peaks.min_distance);
    read_optional(s, "concepts", cfg.segment.concepts);
  }

  if (j.contains("forecast")) {
    const auto& f = j["forecast"];
    reject_unknown(f, {"gamma", "noise_sigma", "horizon", "stats_policy"}, "forecast");
    read(f, "gamma", cfg.forecast.options.gamma);
    read(f, "noise_sigma", cfg.forecast.options.noise_sigma);
    read(f, "horizon", cfg.forecast.horizon);
    if (f.contains("stats_policy")) {
      std::string p;
      read(f, "stats_policy", p);
      cfg.forecast.options.policy = policy_from(p);
    }
  }

  if (j.contains("eval")) {
    const auto& e = j["eval"];
    reject_unknown(e, {"tolerance"}, "eval");
    read(e, "tolerance", cfg.eval_tolerance);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  json j;
  try {
    j = io::read_json_file(path);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::FileNotFound) throw;
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  return config_from_json(j);
}

json to_json(const RunConfig& cfg) {
  const auto& tc = cfg.train;
  const auto& g = cfg.model.grid;
  json j{{"output_dir", cfg.output_dir},
         {"seed", cfg.seed},
         {"data",
          {{"input", cfg.data.input},
           {"has_header", cfg.data.has_header},
           {"timestamp_column", optional_json(cfg.data.timestamp_column)},
           {"patch_width", cfg.data.patch_width},
           {"strict", cfg.data.strict}}},
         {"model",
          {{"hidden", cfg.model.hidden},
           {"latent_dim", cfg.model.latent_dim},
           {"grid", {{"t_min", g.t_min}, {"t_max", g.t_max}, {"intervals", g.intervals}, {"order", g.order}}}}},
         {"train",
          {{"epochs", tc.epochs},
           {"pretrain_epochs", tc.pretrain_epochs},
           {"theta_epochs", tc.theta_epochs},
           {"learning_rate", tc.learning_rate},
           {"theta_learning_rate", tc.theta_learning_rate},
           {"beta1", tc.beta1},
           {"beta2", tc.beta2},
           {"adam_eps", tc.adam_eps},
           {"lambda1", tc.weights.sparsity},
           {"lambda2", tc.weights.selfrep},
           {"lambda3", tc.weights.smoothness},
           {"eps_norm", tc.eps_norm},
           {"tolerance", tc.tolerance},
           {"patience", tc.patience}}},
         {"segment",
          {{"min_prominence", optional_json(cfg.segment.peaks.min_prominence)},
           {"min_distance", cfg.segment.peaks.min_distance},
           {"concepts", optional_json(cfg.segment.concepts)}}},
         {"forecast",
          {{"gamma", cfg.forecast.options.gamma},
           {"noise_sigma", cfg.forecast.options.noise_sigma},
           {"horizon", cfg.forecast.horizon},
           {"stats_policy", policy_name(cfg.forecast.options.policy)}}},
         {"eval", {{"tolerance", cfg.eval_tolerance}}}};
  if (cfg.synth) j["synth"] = *cfg.synth;
  return j;
}

void validate(const RunConfig& cfg) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  if (cfg.output_dir.empty()) fail("output_dir must not be empty");
  if (cfg.data.patch_width < 1) fail("data.patch_width must be >= 1");
  if (cfg.model.latent_dim < 1) fail("model.latent_dim must be >= 1");
  for (auto h : cfg.model.hidden)
    if (h < 1) fail("model.hidden widths must be >= 1");
  try {
    SplineGrid::make(cfg.model.grid.t_min, cfg.model.grid.t_max, cfg.model.grid.intervals, cfg.model.grid.order);
  } catch (const Error& e) {
    fail(std::string("model.grid: ") + e.what());
  }
  validate(cfg.train);
  if (cfg.segment.concepts && *cfg.segment.concepts < 1) fail("segment.concepts must be >= 1");
  if (cfg.segment.peaks.min_distance < 1) fail("segment.min_distance must be >= 1");
  if (!(cfg.forecast.options.gamma > 0.0 && cfg.forecast.options.gamma <= 1.0)) fail("forecast.gamma must be in (0, 1]");
  if (!(cfg.forecast.options.noise_sigma >= 0.0)) fail("forecast.noise_sigma must be >= 0");
  if (cfg.forecast.horizon < 1) fail("forecast.horizon must be >= 1");
}

void apply_environment(RunConfig& cfg) {
  if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) cfg.output_dir = dir;
}

}  // namespace driftkan
