#include "driftkan/patching.hpp"

#include <algorithm>
#include <cmath>

#include "driftkan/error.hpp"

namespace driftkan {

Vector Patch::flatten() const {
  Vector flat(data.size());
  // Row-major storage already is time-major order.
  std::copy(data.data(), data.data() + data.size(), flat.data());
  return flat;
}

Patch Patch::unflatten(const Vector& flat, std::size_t w, std::size_t channels, std::size_t index) {
  require_dims(static_cast<std::size_t>(flat.size()) == w * channels, "flat patch length != w*N");
  Patch p;
  p.index = index;
  p.data.resize(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(channels));
  std::copy(flat.data(), flat.data() + flat.size(), p.data.data());
  return p;
}

Patch PatchSet::patch(std::size_t i) const {
  if (i >= n) throw Error(ErrorCode::IndexOutOfRange, "patch index " + std::to_string(i));
  return Patch::unflatten(data.row(static_cast<Eigen::Index>(i)).transpose(), w, channels, i + 1);
}

PatchSet patchify(const SeriesMatrix& series, std::size_t w, bool strict) {
  const std::size_t l = series.length();
  if (w == 0) throw Error(ErrorCode::InvalidConfig, "patch width must be positive");
  if (w > l) throw Error(ErrorCode::WidthTooLarge, "w=" + std::to_string(w) + " > l=" + std::to_string(l));
  if (strict && l % w != 0)
    throw Error(ErrorCode::IndivisibleLength, "l=" + std::to_string(l) + " not divisible by w=" + std::to_string(w));

  PatchSet set;
  set.w = w;
  set.channels = series.channels();
  set.n = l / w;
  set.dim = w * set.channels;
  set.dropped_tail = l - set.n * w;
  set.data.resize(static_cast<Eigen::Index>(set.n), static_cast<Eigen::Index>(set.dim));
  // Patch i holds exactly steps [i*w, (i+1)*w).
  for (std::size_t i = 0; i < set.n; ++i) {
    const auto block = series.values.middleRows(static_cast<Eigen::Index>(i * w), static_cast<Eigen::Index>(w));
    std::copy(block.data(), block.data() + block.size(), set.data.row(static_cast<Eigen::Index>(i)).data());
  }
  return set;
}

NormStats patch_stats(const Patch& patch, double eps) {
  const auto w = patch.data.rows();
  const auto channels = patch.data.cols();
  NormStats s;
  s.mean.resize(channels);
  s.std.resize(channels);
  for (Eigen::Index c = 0; c < channels; ++c) {
    const auto col = patch.data.col(c);
    const bool constant = (col.array() == col(0)).all();
    double mean = constant ? col(0) : col.sum() / static_cast<double>(w);
    double var = 0.0;
    if (!constant) {
      for (Eigen::Index t = 0; t < w; ++t) var += (col(t) - mean) * (col(t) - mean);
      var /= static_cast<double>(w);
    }
    s.mean(c) = mean;
    s.std(c) = std::max(std::sqrt(var), eps);
  }
  return s;
}

Patch normalize_patch(const Patch& patch, const NormStats& stats) {
  require_dims(stats.mean.size() == patch.data.cols() && stats.std.size() == patch.data.cols(),
               "stats channel count differs from patch");
  Patch out = patch;
  for (Eigen::Index c = 0; c < patch.data.cols(); ++c)
    out.data.col(c) = (patch.data.col(c).array() - stats.mean(c)) / stats.std(c);
  return out;
}

Patch denormalize_patch(const Patch& patch, const NormStats& stats) {
  require_dims(stats.mean.size() == patch.data.cols() && stats.std.size() == patch.data.cols(),
               "stats channel count differs from patch");
  Patch out = patch;
  for (Eigen::Index c = 0; c < patch.data.cols(); ++c)
    out.data.col(c) = patch.data.col(c).array() * stats.std(c) + stats.mean(c);
  return out;
}

PatchSet normalize_patches(const PatchSet& raw, double eps) {
  PatchSet out = raw;
  out.normalized = true;
  out.stats.assign(raw.n, NormStats{});
  const auto n = static_cast<std::int64_t>(raw.n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const Patch p = raw.patch(static_cast<std::size_t>(i));
    NormStats s = patch_stats(p, eps);
    const Patch z = normalize_patch(p, s);
    std::copy(z.data.data(), z.data.data() + z.data.size(), out.data.row(i).data());
    out.stats[static_cast<std::size_t>(i)] = std::move(s);
  }
  return out;
}

PatchSet patch_set_from_matrix(const Matrix& rows) {
  PatchSet set;
  set.w = 1;
  set.n = static_cast<std::size_t>(rows.rows());
  set.channels = static_cast<std::size_t>(rows.cols());
  set.dim = set.channels;
  set.normalized = true;
  set.data = rows;
  set.stats.assign(set.n, NormStats{Vector::Zero(rows.cols()), Vector::Ones(rows.cols())});
  return set;
}

Matrix join_patches(const PatchSet& raw) {
  Matrix out(static_cast<Eigen::Index>(raw.n * raw.w), static_cast<Eigen::Index>(raw.channels));
  std::copy(raw.data.data(), raw.data.data() + raw.data.size(), out.data());
  return out;
}

}  // namespace driftkan
