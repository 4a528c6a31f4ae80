#pragma once

#include <optional>
#include <vector>

#include "driftkan/types.hpp"

namespace driftkan {

struct BoundaryScore {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct EvalReport {
  std::optional<BoundaryScore> boundary;
  std::optional<double> ari;
  std::optional<double> rmse;
  std::size_t tolerance = 1;
};

// Greedy one-to-one matching in ascending order: each predicted boundary takes the
// earliest unused true boundary within `tolerance`.
BoundaryScore boundary_f1(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted,
                          std::size_t tolerance = 1);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

double rmse(const Matrix& truth, const Matrix& predicted);

// Time-step ground truth mapped onto n patches of width w. A label change at step t
// becomes a break after patch round(t / w); breaks outside [1, n-1] are dropped.
std::vector<std::size_t> patch_boundaries_from_steps(const std::vector<std::size_t>& steps, std::size_t w,
                                                     std::size_t n);
// Majority label over each patch's steps, ties to the smaller label.
std::vector<int> patch_labels_from_steps(const std::vector<int>& step_labels, std::size_t w, std::size_t n);

}  // namespace driftkan
