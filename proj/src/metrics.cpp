#include "driftkan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "driftkan/error.hpp"

namespace driftkan {

BoundaryScore boundary_f1(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted,
                          std::size_t tolerance) {
  if (!std::is_sorted(truth.begin(), truth.end()) || !std::is_sorted(predicted.begin(), predicted.end()))
    throw Error(ErrorCode::UnsortedInput, "boundary lists must be sorted ascending");
  if (truth.empty() && predicted.empty()) return {1.0, 1.0, 1.0};
  if (truth.empty() || predicted.empty()) return {0.0, 0.0, 0.0};

  std::vector<bool> used(truth.size(), false);
  std::size_t hits = 0;
  for (std::size_t b : predicted) {
    for (std::size_t j = 0; j < truth.size(); ++j) {
      if (used[j]) continue;
      const std::size_t gap = b > truth[j] ? b - truth[j] : truth[j] - b;
      if (gap <= tolerance) {
        used[j] = true;
        ++hits;
        break;
      }
    }
  }
  BoundaryScore s;
  s.precision = static_cast<double>(hits) / static_cast<double>(predicted.size());
  s.recall = static_cast<double>(hits) / static_cast<double>(truth.size());
  s.f1 = hits == 0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "label vectors differ in length");
  if (a.size() < 2) throw Error(ErrorCode::LengthMismatch, "ARI needs at least 2 items");
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto pairs = [](double x) { return 0.5 * x * (x - 1.0); };
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, count] : table) index += pairs(count);
  for (const auto& [key, count] : rows) sum_a += pairs(count);
  for (const auto& [key, count] : cols) sum_b += pairs(count);
  const double expected = sum_a * sum_b / pairs(static_cast<double>(a.size()));
  const double max_index = 0.5 * (sum_a + sum_b);
  // Both partitions trivial (all-in-one or all singletons) and therefore identical.
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double rmse(const Matrix& truth, const Matrix& predicted) {
  require_dims(truth.rows() == predicted.rows() && truth.cols() == predicted.cols(), "rmse shape mismatch");
  if (truth.size() == 0) throw Error(ErrorCode::EmptyInput, "rmse of empty matrices");
  return std::sqrt((truth - predicted).squaredNorm() / static_cast<double>(truth.size()));
}

std::vector<std::size_t> patch_boundaries_from_steps(const std::vector<std::size_t>& steps, std::size_t w,
                                                     std::size_t n) {
  if (w == 0) throw Error(ErrorCode::InvalidConfig, "patch width must be >= 1");
  std::vector<std::size_t> out;
  for (std::size_t t : steps) {
    const std::size_t j = (2 * t + w) / (2 * w);  // round half up
    if (j >= 1 && j + 1 <= n) out.push_back(j);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> patch_labels_from_steps(const std::vector<int>& step_labels, std::size_t w, std::size_t n) {
  if (w == 0) throw Error(ErrorCode::InvalidConfig, "patch width must be >= 1");
  if (step_labels.size() < n * w)
    throw Error(ErrorCode::LengthMismatch, "ground truth covers fewer steps than the patches");
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::map<int, std::size_t> votes;
    for (std::size_t t = i * w; t < (i + 1) * w; ++t) ++votes[step_labels[t]];
    int best = votes.begin()->first;
    for (const auto& [label, count] : votes)
      if (count > votes[best]) best = label;
    out[i] = best;
  }
  return out;
}

}  // namespace driftkan
