#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "driftkan/selfrep.hpp"
#include "driftkan/types.hpp"

namespace driftkan {

struct BoundaryScores {
  Vector mu_b;  // length n-1, column means of |theta_s R|
  Matrix b;     // |theta_s R|
};

// Patch indices are 1-based here: boundary j means a break between patches j and j+1.
struct Segmentation {
  std::size_t n = 0;
  std::vector<std::size_t> boundaries;
  std::vector<std::pair<std::size_t, std::size_t>> segments;  // inclusive [start, end]

  static Segmentation from_boundaries(std::size_t n, std::vector<std::size_t> boundaries);
};

struct ConceptMap {
  std::vector<int> segment_labels;
  std::vector<int> patch_labels;
  int k = 0;
  std::vector<Vector> prototypes;  // latent centroid per concept
};

struct DriftEvent {
  std::size_t patch = 0;
  int from_concept = 0;
  int to_concept = 0;
  double score = 0.0;
};

struct PeakOptions {
  std::optional<double> min_prominence;  // default: mean + 1.0 * std of the scores
  std::size_t min_distance = 2;
};

BoundaryScores boundary_scores(const Matrix& theta_s, const Matrix& r);

// Local maxima of `signal` (0-based) with their topographic prominence.
struct Peak {
  std::size_t index = 0;
  double height = 0.0;
  double prominence = 0.0;
};
std::vector<Peak> find_peaks(const Vector& signal, double min_prominence, std::size_t min_distance);

Segmentation detect_boundaries(const BoundaryScores& scores, const PeakOptions& options = {});

ConceptMap cluster_segments(const Segmentation& segmentation, const Matrix& z, const Matrix& theta_s,
                            std::optional<int> k = std::nullopt);

// Concept centroids of the latent rows; recomputed from patch labels.
std::vector<Vector> concept_prototypes(const Matrix& z, const std::vector<int>& patch_labels, int k);

std::optional<DriftEvent> drift_monitor(const ConceptMap& concepts, const Vector& z_t, int current_concept,
                                        std::size_t patch_index = 0);

}  // namespace driftkan
