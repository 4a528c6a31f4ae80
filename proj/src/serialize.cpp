#include "driftkan/serialize.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "driftkan/error.hpp"

namespace driftkan::io {

namespace {

void expect_format(const json& j, const char* format) {
  if (!j.is_object() || !j.contains("format") || j["format"] != format)
    throw Error(ErrorCode::InvalidFormat, std::string("expected a '") + format + "' document");
  if (!j.contains("version") || j["version"] != kFormatVersion)
    throw Error(ErrorCode::InvalidFormat, std::string("unsupported '") + format + "' version");
}

template <typename T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::InvalidFormat, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidFormat, std::string("field '") + key + "': " + e.what());
  }
}

std::vector<double> finite_vector(const json& j, const char* key) {
  auto v = get<std::vector<double>>(j, key);
  for (double x : v)
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidFormat, std::string("non-finite value in '") + key + "'");
  return v;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

const char* family_name(GeneratorFamily f) {
  return f == GeneratorFamily::SinusoidMixture ? "sinusoid" : "recurrence";
}

}  // namespace

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    rows.push_back(std::vector<double>(m.row(r).data(), m.row(r).data() + m.cols()));
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidFormat, "matrix must be an array of rows");
  if (j.empty()) return Matrix();
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw Error(ErrorCode::InvalidFormat, "ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& cell = row[static_cast<std::size_t>(c)];
      if (!cell.is_number()) throw Error(ErrorCode::InvalidFormat, "matrix entries must be numbers");
      m(r, c) = cell.get<double>();
      if (!std::isfinite(m(r, c))) throw Error(ErrorCode::InvalidFormat, "non-finite matrix entry");
    }
  }
  return m;
}

json to_json(const GroundTruth& truth) {
  return json{{"boundaries", truth.boundaries}, {"labels", truth.labels}};
}

GroundTruth ground_truth_from_json(const json& j) {
  GroundTruth t;
  t.boundaries = get<std::vector<std::size_t>>(j, "boundaries");
  t.labels = get<std::vector<int>>(j, "labels");
  return t;
}

json to_json(const SyntheticSpec& spec) {
  json regimes = json::array();
  for (const auto& r : spec.regimes) {
    json jr{{"family", family_name(r.family)}, {"duration", r.duration}, {"id", r.id},
            {"components", r.components}, {"period", r.period}};
    if (r.sinusoid) {
      jr["sinusoid"] = {{"frequencies", r.sinusoid->frequencies},
                        {"amplitudes", r.sinusoid->amplitudes},
                        {"coupling", matrix_to_json(r.sinusoid->coupling)},
                        {"phases", matrix_to_json(r.sinusoid->phases)}};
    }
    if (r.recurrence) {
      jr["recurrence"] = {{"radii", r.recurrence->radii},
                          {"angular_frequencies", r.recurrence->angular_frequencies},
                          {"mixing", matrix_to_json(r.recurrence->mixing)},
                          {"innovation", r.recurrence->innovation}};
    }
    regimes.push_back(std::move(jr));
  }
  return json{{"length", spec.length}, {"channels", spec.channels}, {"noise_sigma", spec.noise_sigma},
              {"seed", spec.seed}, {"regimes", regimes}};
}

SyntheticSpec synthetic_spec_from_json(const json& j, std::uint64_t default_seed) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidSpec, "synthetic spec must be an object");
  SyntheticSpec spec;
  try {
    spec.length = j.at("length").get<std::size_t>();
    spec.channels = j.at("channels").get<std::size_t>();
    spec.noise_sigma = j.value("noise_sigma", 0.0);
    spec.seed = j.value("seed", default_seed);
    for (const auto& jr : j.at("regimes")) {
      RegimeSpec r;
      const std::string family = jr.value("family", std::string("sinusoid"));
      if (family == "sinusoid")
        r.family = GeneratorFamily::SinusoidMixture;
      else if (family == "recurrence")
        r.family = GeneratorFamily::LinearRecurrence;
      else
        throw Error(ErrorCode::InvalidSpec, "unknown generator family '" + family + "'");
      r.duration = jr.at("duration").get<std::size_t>();
      r.id = jr.value("id", -1);
      r.components = jr.value("components", std::size_t{2});
      r.period = jr.value("period", std::size_t{0});
      if (jr.contains("sinusoid")) {
        const auto& s = jr["sinusoid"];
        r.sinusoid = SinusoidParams{s.at("frequencies").get<std::vector<double>>(),
                                    s.at("amplitudes").get<std::vector<double>>(), matrix_from_json(s.at("coupling")),
                                    matrix_from_json(s.at("phases"))};
      }
      if (jr.contains("recurrence")) {
        const auto& q = jr["recurrence"];
        r.recurrence = RecurrenceParams{q.at("radii").get<std::vector<double>>(),
                                        q.at("angular_frequencies").get<std::vector<double>>(),
                                        matrix_from_json(q.at("mixing")), q.value("innovation", 0.1)};
      }
      spec.regimes.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, e.what());
  }
  return spec;
}

json to_json(const PatchSet& p) {
  json stats = json::array();
  for (const auto& s : p.stats) stats.push_back({{"mean", vector_json(s.mean)}, {"std", vector_json(s.std)}});
  return json{{"format", "driftkan-patchset"},
              {"version", kFormatVersion},
              {"w", p.w},
              {"n", p.n},
              {"D", p.dim},
              {"channels", p.channels},
              {"dropped_tail", p.dropped_tail},
              {"normalized", p.normalized},
              {"data", matrix_to_json(p.data)},
              {"stats", stats}};
}

PatchSet patch_set_from_json(const json& j) {
  expect_format(j, "driftkan-patchset");
  PatchSet p;
  p.w = get<std::size_t>(j, "w");
  p.n = get<std::size_t>(j, "n");
  p.dim = get<std::size_t>(j, "D");
  p.channels = get<std::size_t>(j, "channels");
  p.dropped_tail = get<std::size_t>(j, "dropped_tail");
  p.normalized = get<bool>(j, "normalized");
  p.data = matrix_from_json(j.at("data"));
  if (p.dim != p.w * p.channels || static_cast<std::size_t>(p.data.rows()) != p.n ||
      static_cast<std::size_t>(p.data.cols()) != p.dim)
    throw Error(ErrorCode::InvalidFormat, "patch set dimensions inconsistent");
  for (const auto& s : get<json>(j, "stats")) {
    NormStats st{vector_from(finite_vector(s, "mean")), vector_from(finite_vector(s, "std"))};
    if (static_cast<std::size_t>(st.mean.size()) != p.channels || static_cast<std::size_t>(st.std.size()) != p.channels)
      throw Error(ErrorCode::InvalidFormat, "norm stats channel count");
    p.stats.push_back(std::move(st));
  }
  if (!p.stats.empty() && p.stats.size() != p.n) throw Error(ErrorCode::InvalidFormat, "one stats entry per patch");
  return p;
}

json to_json(const KanNetwork& net) {
  json layers = json::array();
  for (const auto& l : net.layers)
    layers.push_back({{"in_dim", l.in_dim},
                      {"out_dim", l.out_dim},
                      {"grid", {{"t_min", l.grid.t_min}, {"t_max", l.grid.t_max}, {"intervals", l.grid.intervals}, {"order", l.grid.order}}},
                      {"spline_coeffs", l.coeffs},
                      {"base_weights", l.base},
                      {"spline_scales", l.scale}});
  return json{{"format", "driftkan-kan"}, {"version", kFormatVersion}, {"dims", net.dims()}, {"layers", layers}};
}

KanNetwork kan_network_from_json(const json& j) {
  expect_format(j, "driftkan-kan");
  KanNetwork net;
  for (const auto& jl : get<json>(j, "layers")) {
    const auto& g = get<json>(jl, "grid");
    SplineGrid grid;
    try {
      grid = SplineGrid::make(get<double>(g, "t_min"), get<double>(g, "t_max"), get<int>(g, "intervals"), get<int>(g, "order"));
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidFormat, e.what());
    }
    KanLayer layer = KanLayer::zeros(get<std::size_t>(jl, "in_dim"), get<std::size_t>(jl, "out_dim"), grid);
    layer.coeffs = finite_vector(jl, "spline_coeffs");
    layer.base = finite_vector(jl, "base_weights");
    layer.scale = finite_vector(jl, "spline_scales");
    net.layers.push_back(std::move(layer));
  }
  try {
    validate(net);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidFormat, e.what());
  }
  if (get<std::vector<std::size_t>>(j, "dims") != net.dims()) throw Error(ErrorCode::InvalidFormat, "dims do not match layers");
  return net;
}

json to_json(const Checkpoint& c) {
  const auto& m = c.model;
  return json{{"format", "driftkan-checkpoint"},
              {"version", kFormatVersion},
              {"encoder", to_json(m.encoder)},
              {"decoder", to_json(m.decoder)},
              {"theta_s", matrix_to_json(m.theta_s)},
              {"loss_weights", {{"lambda1", m.weights.sparsity}, {"lambda2", m.weights.selfrep}, {"lambda3", m.weights.smoothness}}},
              {"patches", to_json(c.patches)},
              {"config", c.config}};
}

Checkpoint checkpoint_from_json(const json& j) {
  expect_format(j, "driftkan-checkpoint");
  Checkpoint c;
  c.model.encoder = kan_network_from_json(get<json>(j, "encoder"));
  c.model.decoder = kan_network_from_json(get<json>(j, "decoder"));
  c.model.theta_s = matrix_from_json(get<json>(j, "theta_s"));
  const auto& w = get<json>(j, "loss_weights");
  c.model.weights = {get<double>(w, "lambda1"), get<double>(w, "lambda2"), get<double>(w, "lambda3")};
  c.patches = patch_set_from_json(get<json>(j, "patches"));
  c.config = j.value("config", json::object());
  const auto& m = c.model;
  if (m.theta_s.rows() != m.theta_s.cols() || m.n() != c.patches.n || m.patch_dim() != c.patches.dim ||
      m.decoder.in_dim() != m.latent_dim() || m.decoder.out_dim() != m.patch_dim())
    throw Error(ErrorCode::InvalidFormat, "checkpoint components disagree on n, D or latent width");
  return c;
}

json to_json(const TrainReport& r) {
  json trace = json::array();
  for (std::size_t e = 0; e < r.trace.size(); ++e) {
    const auto& c = r.trace[e];
    trace.push_back({{"epoch", e}, {"total", c.total}, {"reconstruction", c.reconstruction}, {"sparsity", c.sparsity},
                     {"selfrep", c.selfrep}, {"smoothness", c.smoothness}});
  }
  return json{{"format", "driftkan-train-report"}, {"version", kFormatVersion}, {"epochs", r.trace.size()},
              {"converged", r.converged}, {"final_grad_norm", r.final_grad_norm}, {"wall_seconds", r.wall_seconds},
              {"trace", trace}};
}

json concept_map_json(const Segmentation& s, const ConceptMap& c, std::size_t w) {
  json segments = json::array();
  for (const auto& [a, b] : s.segments) segments.push_back({a, b});
  json prototypes = json::array();
  for (const auto& p : c.prototypes) prototypes.push_back(vector_json(p));
  return json{{"format", "driftkan-segmentation"},
              {"version", kFormatVersion},
              {"w", w},
              {"n", s.n},
              {"boundaries", s.boundaries},
              {"segments", segments},
              {"segment_labels", c.segment_labels},
              {"labels_per_patch", c.patch_labels},
              {"k", c.k},
              {"prototypes", prototypes}};
}

SegmentationDocument segmentation_from_json(const json& j) {
  expect_format(j, "driftkan-segmentation");
  SegmentationDocument d;
  d.w = get<std::size_t>(j, "w");
  d.segmentation = Segmentation::from_boundaries(get<std::size_t>(j, "n"), get<std::vector<std::size_t>>(j, "boundaries"));
  d.concepts.k = get<int>(j, "k");
  d.concepts.patch_labels = get<std::vector<int>>(j, "labels_per_patch");
  d.concepts.segment_labels = j.value("segment_labels", std::vector<int>{});
  for (const auto& p : get<json>(j, "prototypes")) d.concepts.prototypes.push_back(vector_from(p.get<std::vector<double>>()));
  if (d.concepts.patch_labels.size() != d.segmentation.n)
    throw Error(ErrorCode::InvalidFormat, "labels_per_patch length != n");
  return d;
}

json to_json(const HorizonForecast& f) {
  json patches = json::array();
  json per_step = json::array();
  for (const auto& step : f.steps) {
    patches.push_back(std::vector<double>(step.denormalized.data(), step.denormalized.data() + step.denormalized.size()));
    json weights = json::array();
    for (const auto& [i, a] : step.weights) weights.push_back({i, a});
    per_step.push_back(std::move(weights));
  }
  return json{{"format", "driftkan-forecast"},
              {"version", kFormatVersion},
              {"horizon", f.steps.size()},
              {"concepts", f.concepts},
              {"patches", patches},
              {"weights", per_step.empty() ? json::array() : per_step[0]},
              {"weights_per_step", per_step}};
}

json to_json(const EvalReport& r) {
  json j{{"format", "driftkan-eval"}, {"version", kFormatVersion}, {"tolerance", r.tolerance}};
  if (r.boundary) {
    j["f1"] = r.boundary->f1;
    j["precision"] = r.boundary->precision;
    j["recall"] = r.boundary->recall;
  }
  if (r.ari) j["ari"] = *r.ari;
  if (r.rmse) j["rmse"] = *r.rmse;
  return j;
}

json read_json_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw Error(ErrorCode::FileNotFound, path);
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidFormat, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j, int indent) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path);
  out << j.dump(indent) << '\n';
}

}  // namespace driftkan::io
