#pragma once

#include <cstddef>
#include <vector>

#include "driftkan/ingest.hpp"
#include "driftkan/types.hpp"

namespace driftkan {

inline constexpr double kNormEps = 1e-5;

// Per-channel statistics of one patch; std is the population std floored at kNormEps.
struct NormStats {
  Vector mean;
  Vector std;
};

// One patch as a w x N block. Flattening is time-major: step 0 channels, step 1 channels, ...
struct Patch {
  Matrix data;
  std::size_t index = 0;  // 1-based position in the series

  Vector flatten() const;
  static Patch unflatten(const Vector& flat, std::size_t w, std::size_t channels, std::size_t index = 0);
};

struct PatchSet {
  std::size_t w = 0;
  std::size_t channels = 0;
  std::size_t n = 0;
  std::size_t dim = 0;  // w * channels
  std::size_t dropped_tail = 0;
  bool normalized = false;
  Matrix data;                  // n x dim, one flattened patch per row
  std::vector<NormStats> stats;  // filled by normalize_patches

  Patch patch(std::size_t i) const;  // 0-based row i
};

PatchSet patchify(const SeriesMatrix& series, std::size_t w, bool strict = false);

NormStats patch_stats(const Patch& patch, double eps = kNormEps);
Patch normalize_patch(const Patch& patch, const NormStats& stats);
Patch denormalize_patch(const Patch& patch, const NormStats& stats);

PatchSet normalize_patches(const PatchSet& raw, double eps = kNormEps);

// Wraps an already-prepared n x D matrix (identity stats, w = 1).
PatchSet patch_set_from_matrix(const Matrix& rows);

// Undoes patchify: concatenates patches back into an (n*w) x N series.
Matrix join_patches(const PatchSet& raw);

}  // namespace driftkan
