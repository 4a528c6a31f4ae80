#include "driftkan/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "driftkan/error.hpp"
#include "driftkan/rng.hpp"

namespace driftkan {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

}  // namespace

SeriesMatrix load_csv(const std::string& path, bool has_header,
                      std::optional<std::size_t> timestamp_column) {
  if (!std::filesystem::is_regular_file(path)) throw Error(ErrorCode::FileNotFound, path);
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path);

  std::vector<std::string> names;
  std::vector<double> flat;
  std::size_t width = 0;  // cells per row including the timestamp column
  std::size_t rows = 0;
  bool header_pending = has_header;
  std::string line;

  while (std::getline(in, line)) {
    if (is_blank(line)) continue;
    const auto cells = split_commas(line);
    if (timestamp_column && *timestamp_column >= cells.size()) {
      throw Error(ErrorCode::RaggedRows, "timestamp column beyond row width",
                  static_cast<std::int64_t>(rows + 1));
    }
    if (header_pending) {
      header_pending = false;
      width = cells.size();
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (timestamp_column && c == *timestamp_column) continue;
        names.emplace_back(cells[c]);
      }
      continue;
    }
    ++rows;
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw Error(ErrorCode::RaggedRows,
                  "row " + std::to_string(rows) + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(width),
                  static_cast<std::int64_t>(rows));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (timestamp_column && c == *timestamp_column) continue;
      const auto cell = cells[c];
      double value = 0.0;
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      if (!cell.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw Error(ErrorCode::ParseError,
                    "row " + std::to_string(rows) + " col " + std::to_string(c + 1) + ": '" +
                        std::string(cell) + "'",
                    static_cast<std::int64_t>(rows), static_cast<std::int64_t>(c + 1));
      }
      flat.push_back(value);
    }
  }

  const std::size_t channels = timestamp_column ? (width == 0 ? 0 : width - 1) : width;
  if (rows == 0 || channels == 0) throw Error(ErrorCode::EmptyInput, path);

  SeriesMatrix series;
  series.values = Eigen::Map<Matrix>(flat.data(), static_cast<Eigen::Index>(rows),
                                     static_cast<Eigen::Index>(channels));
  if (names.size() == channels) {
    series.channel_names = std::move(names);
  } else {
    for (std::size_t c = 0; c < channels; ++c) series.channel_names.push_back("c" + std::to_string(c));
  }
  return series;
}

void save_csv(const std::string& path, const SeriesMatrix& series, bool with_header,
              int significant_digits) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path);
  if (with_header) {
    for (std::size_t c = 0; c < series.channels(); ++c) {
      if (c) out << ',';
      out << (c < series.channel_names.size() ? series.channel_names[c] : "c" + std::to_string(c));
    }
    out << '\n';
  }
  char buf[64];
  for (Eigen::Index r = 0; r < series.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < series.values.cols(); ++c) {
      if (c) out << ',';
      std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, series.values(r, c));
      out << buf;
    }
    out << '\n';
  }
}

SinusoidParams draw_sinusoid_params(std::uint64_t seed, int regime_id, std::size_t channels,
                                    std::size_t components, std::size_t period) {
  Rng rng(derive_seed(seed, 0x51a0000ULL + static_cast<std::uint64_t>(regime_id)));
  SinusoidParams p;
  const auto n = static_cast<Eigen::Index>(channels);
  const auto k = static_cast<Eigen::Index>(components);
  for (std::size_t c = 0; c < components; ++c) {
    if (period > 0) {
      // Whole cycles per period, at most a quarter of the Nyquist-limited count.
      const auto max_cycles = std::max<std::size_t>(1, period / 4);
      const auto cycles = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_cycles));
      p.frequencies.push_back(static_cast<double>(std::min(cycles, max_cycles)) / static_cast<double>(period));
    } else {
      p.frequencies.push_back(rng.uniform(0.02, 0.2));
    }
    p.amplitudes.push_back(rng.uniform(0.5, 1.5));
  }
  p.coupling.resize(n, k);
  p.phases.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      p.coupling(i, j) = rng.uniform(-1.0, 1.0);
      p.phases(i, j) = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
  }
  return p;
}

RecurrenceParams draw_recurrence_params(std::uint64_t seed, int regime_id, std::size_t channels,
                                        std::size_t components) {
  Rng rng(derive_seed(seed, 0x7ec0000ULL + static_cast<std::uint64_t>(regime_id)));
  RecurrenceParams p;
  for (std::size_t c = 0; c < components; ++c) {
    p.radii.push_back(rng.uniform(0.95, 0.995));
    p.angular_frequencies.push_back(2.0 * std::numbers::pi * rng.uniform(0.02, 0.2));
  }
  p.mixing.resize(static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(components));
  for (Eigen::Index i = 0; i < p.mixing.rows(); ++i)
    for (Eigen::Index j = 0; j < p.mixing.cols(); ++j) p.mixing(i, j) = rng.uniform(-1.0, 1.0);
  return p;
}

void validate(const SyntheticSpec& spec) {
  if (spec.length == 0 || spec.channels == 0)
    throw Error(ErrorCode::InvalidSpec, "length and channels must be positive");
  if (spec.regimes.empty()) throw Error(ErrorCode::InvalidSpec, "at least one regime required");
  if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma))
    throw Error(ErrorCode::InvalidSpec, "noise_sigma must be a nonnegative finite real");
  std::size_t total = 0;
  for (const auto& r : spec.regimes) {
    if (r.duration == 0) throw Error(ErrorCode::InvalidSpec, "regime duration must be positive");
    if (r.components == 0) throw Error(ErrorCode::InvalidSpec, "regime needs at least one component");
    if (r.sinusoid) {
      const auto& s = *r.sinusoid;
      const auto k = s.frequencies.size();
      if (k == 0 || s.amplitudes.size() != k || static_cast<std::size_t>(s.coupling.cols()) != k ||
          static_cast<std::size_t>(s.coupling.rows()) != spec.channels ||
          s.phases.rows() != s.coupling.rows() || s.phases.cols() != s.coupling.cols())
        throw Error(ErrorCode::InvalidSpec, "sinusoid parameter shapes inconsistent");
    }
    if (r.recurrence) {
      const auto& q = *r.recurrence;
      const auto k = q.radii.size();
      if (k == 0 || q.angular_frequencies.size() != k ||
          static_cast<std::size_t>(q.mixing.cols()) != k ||
          static_cast<std::size_t>(q.mixing.rows()) != spec.channels)
        throw Error(ErrorCode::InvalidSpec, "recurrence parameter shapes inconsistent");
      for (double radius : q.radii)
        if (!(radius >= 0.0 && radius < 1.0))
          throw Error(ErrorCode::InvalidSpec, "recurrence radius must lie in [0, 1)");
    }
    total += r.duration;
  }
  if (total != spec.length)
    throw Error(ErrorCode::InvalidSpec, "regime durations sum to " + std::to_string(total) +
                                            ", expected " + std::to_string(spec.length));
}

std::pair<SeriesMatrix, GroundTruth> generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  const auto l = static_cast<Eigen::Index>(spec.length);
  const auto n = static_cast<Eigen::Index>(spec.channels);

  SeriesMatrix series;
  series.values = Matrix::Zero(l, n);
  for (std::size_t c = 0; c < spec.channels; ++c) series.channel_names.push_back("c" + std::to_string(c));

  GroundTruth truth;
  truth.labels.reserve(spec.length);

  Rng noise(derive_seed(spec.seed, 1));
  Rng innovations(derive_seed(spec.seed, 2));

  Eigen::Index t = 0;
  for (std::size_t r = 0; r < spec.regimes.size(); ++r) {
    const auto& regime = spec.regimes[r];
    const int id = regime.id >= 0 ? regime.id : static_cast<int>(r);
    if (!truth.labels.empty() && truth.labels.back() != id)
      truth.boundaries.push_back(static_cast<std::size_t>(t));
    const auto end = t + static_cast<Eigen::Index>(regime.duration);

    if (regime.family == GeneratorFamily::SinusoidMixture) {
      const SinusoidParams p = regime.sinusoid
                                   ? *regime.sinusoid
                                   : draw_sinusoid_params(spec.seed, id, spec.channels, regime.components, regime.period);
      for (Eigen::Index step = t; step < end; ++step) {
        const double time = static_cast<double>(step);
        for (Eigen::Index c = 0; c < n; ++c) {
          double v = 0.0;
          for (std::size_t k = 0; k < p.frequencies.size(); ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            v += p.amplitudes[k] * p.coupling(c, kk) *
                 std::sin(2.0 * std::numbers::pi * p.frequencies[k] * time + p.phases(c, kk));
          }
          series.values(step, c) = v;
        }
      }
    } else {
      const RecurrenceParams p =
          regime.recurrence ? *regime.recurrence
                            : draw_recurrence_params(spec.seed, id, spec.channels, regime.components);
      const std::size_t k = p.radii.size();
      std::vector<double> prev2(k, 0.0), prev1(k, 1.0);
      for (Eigen::Index step = t; step < end; ++step) {
        std::vector<double> state(k);
        for (std::size_t j = 0; j < k; ++j) {
          const double r2 = p.radii[j];
          state[j] = 2.0 * r2 * std::cos(p.angular_frequencies[j]) * prev1[j] - r2 * r2 * prev2[j] +
                     p.innovation * innovations.normal();
        }
        for (Eigen::Index c = 0; c < n; ++c) {
          double v = 0.0;
          for (std::size_t j = 0; j < k; ++j) v += p.mixing(c, static_cast<Eigen::Index>(j)) * state[j];
          series.values(step, c) = v;
        }
        prev2 = prev1;
        prev1 = state;
      }
    }
    for (Eigen::Index step = t; step < end; ++step) truth.labels.push_back(id);
    t = end;
  }

  if (spec.noise_sigma > 0.0) {
    for (Eigen::Index i = 0; i < l; ++i)
      for (Eigen::Index c = 0; c < n; ++c) series.values(i, c) += spec.noise_sigma * noise.normal();
  }
  return {std::move(series), std::move(truth)};
}

SubspaceFixture generate_subspace_patches(std::size_t patches_per_concept, std::size_t concepts,
                                          std::size_t patch_dim, std::size_t subspace_dim,
                                          std::uint64_t seed) {
  Rng rng(seed);
  const auto d = static_cast<Eigen::Index>(patch_dim);
  const auto r = static_cast<Eigen::Index>(subspace_dim);
  SubspaceFixture fixture;
  fixture.patches.resize(static_cast<Eigen::Index>(patches_per_concept * concepts), d);
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < concepts; ++c) {
    Matrix basis(d, r);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < r; ++j) basis(i, j) = rng.normal() / std::sqrt(static_cast<double>(r));
    for (std::size_t i = 0; i < patches_per_concept; ++i) {
      Vector coeff(r);
      for (Eigen::Index j = 0; j < r; ++j) coeff(j) = rng.normal();
      fixture.patches.row(row++) = (basis * coeff).transpose();
      fixture.labels.push_back(static_cast<int>(c));
    }
  }
  return fixture;
}

}  // namespace driftkan
