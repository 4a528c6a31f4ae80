#pragma once

#include <string>

#include <json.hpp>

#include "driftkan/concepts.hpp"
#include "driftkan/forecast.hpp"
#include "driftkan/ingest.hpp"
#include "driftkan/metrics.hpp"
#include "driftkan/patching.hpp"
#include "driftkan/selfrep.hpp"

// JSON documents exchanged by the CLI. Every top-level document carries
// "format" and "version"; loaders reject mismatches with InvalidFormat.
namespace driftkan::io {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

json to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(const json& j);

json to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const json& j, std::uint64_t default_seed = 0);

json to_json(const PatchSet& patches);
PatchSet patch_set_from_json(const json& j);

json to_json(const KanNetwork& net);
KanNetwork kan_network_from_json(const json& j);

struct Checkpoint {
  SelfRepModel model;
  PatchSet patches;
  json config;  // echo of the run configuration
};
json to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const json& j);

json to_json(const TrainReport& report);

json concept_map_json(const Segmentation& segmentation, const ConceptMap& concepts, std::size_t w);
struct SegmentationDocument {
  Segmentation segmentation;
  ConceptMap concepts;
  std::size_t w = 1;
};
SegmentationDocument segmentation_from_json(const json& j);

json to_json(const HorizonForecast& forecast);
json to_json(const EvalReport& report);

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

json read_json_file(const std::string& path);
// Trailing newline; byte-stable for identical documents. indent < 0 writes compactly.
void write_json_file(const std::string& path, const json& j, int indent = 2);

}  // namespace driftkan::io
