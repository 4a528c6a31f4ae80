#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "driftkan/concepts.hpp"
#include "driftkan/forecast.hpp"
#include "driftkan/ingest.hpp"
#include "driftkan/selfrep.hpp"

namespace driftkan {

// Environment variable that overrides the configured output directory.
// Precedence: --out flag, then this variable, then the config file.
inline constexpr const char* kOutputDirEnv = "DRIFTKAN_OUT_DIR";

struct DataConfig {
  std::string input;  // CSV path; empty means "use the synth output"
  bool has_header = true;
  std::optional<std::size_t> timestamp_column;
  std::size_t patch_width = 20;
  bool strict = false;
};

struct SegmentConfig {
  PeakOptions peaks;
  std::optional<int> concepts;  // fixed k; eigengap when absent
};

struct ForecastConfig {
  ForecastOptions options;
  std::size_t horizon = 1;
};

struct RunConfig {
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  DataConfig data;
  std::optional<nlohmann::json> synth;  // raw synthetic spec, parsed by the synth command
  ModelConfig model;
  TrainConfig train;
  SegmentConfig segment;
  ForecastConfig forecast;
  std::size_t eval_tolerance = 1;
};

// Missing keys keep their defaults; unknown keys are rejected (InvalidConfig).
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& cfg);

// Throws InvalidConfig on out-of-range values.
void validate(const RunConfig& cfg);

// Applies kOutputDirEnv when set and non-empty.
void apply_environment(RunConfig& cfg);

}  // namespace driftkan
