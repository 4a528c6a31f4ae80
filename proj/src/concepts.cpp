#include "driftkan/concepts.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "driftkan/error.hpp"

namespace driftkan {

Segmentation Segmentation::from_boundaries(std::size_t n, std::vector<std::size_t> boundaries) {
  std::sort(boundaries.begin(), boundaries.end());
  boundaries.erase(std::unique(boundaries.begin(), boundaries.end()), boundaries.end());
  Segmentation s;
  s.n = n;
  std::size_t start = 1;
  for (std::size_t b : boundaries) {
    if (b < 1 || b >= n) throw Error(ErrorCode::IndexOutOfRange, "boundary " + std::to_string(b) + " outside [1, n-1]");
    s.segments.emplace_back(start, b);
    start = b + 1;
  }
  if (n > 0) s.segments.emplace_back(start, n);
  s.boundaries = std::move(boundaries);
  return s;
}

BoundaryScores boundary_scores(const Matrix& theta_s, const Matrix& r) {
  require_dims(theta_s.cols() == r.rows(), "theta_s columns != R rows");
  BoundaryScores scores;
  scores.b = (theta_s * r).cwiseAbs();
  scores.mu_b = scores.b.colwise().mean().transpose();
  return scores;
}

std::vector<Peak> find_peaks(const Vector& x, double min_prominence, std::size_t min_distance) {
  const auto n = static_cast<std::size_t>(x.size());
  std::vector<Peak> peaks;
  // Strict local maxima; a flat top becomes one peak at its (left-rounded) middle.
  std::size_t i = 1;
  while (n >= 3 && i + 1 < n) {
    if (x(static_cast<Eigen::Index>(i - 1)) < x(static_cast<Eigen::Index>(i))) {
      std::size_t ahead = i + 1;
      while (ahead + 1 < n && x(static_cast<Eigen::Index>(ahead)) == x(static_cast<Eigen::Index>(i))) ++ahead;
      if (x(static_cast<Eigen::Index>(ahead)) < x(static_cast<Eigen::Index>(i))) {
        peaks.push_back({(i + ahead - 1) / 2, x(static_cast<Eigen::Index>(i)), 0.0});
        i = ahead;
        continue;
      }
    }
    ++i;
  }

  for (auto& peak : peaks) {
    const double h = peak.height;
    double left_min = h;
    for (std::size_t j = peak.index; j-- > 0;) {
      const double v = x(static_cast<Eigen::Index>(j));
      if (v > h) break;
      left_min = std::min(left_min, v);
    }
    double right_min = h;
    for (std::size_t j = peak.index + 1; j < n; ++j) {
      const double v = x(static_cast<Eigen::Index>(j));
      if (v > h) break;
      right_min = std::min(right_min, v);
    }
    peak.prominence = h - std::max(left_min, right_min);
  }

  std::erase_if(peaks, [&](const Peak& p) { return !(p.prominence >= min_prominence) || p.prominence <= 0.0; });

  if (min_distance > 1 && peaks.size() > 1) {
    std::vector<std::size_t> order(peaks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return peaks[a].height > peaks[b].height; });
    std::vector<bool> keep(peaks.size(), true);
    for (std::size_t oi : order) {
      if (!keep[oi]) continue;
      for (std::size_t j = 0; j < peaks.size(); ++j) {
        if (j == oi || !keep[j]) continue;
        const std::size_t gap = peaks[j].index > peaks[oi].index ? peaks[j].index - peaks[oi].index
                                                                  : peaks[oi].index - peaks[j].index;
        if (gap < min_distance) keep[j] = false;
      }
    }
    std::vector<Peak> kept;
    for (std::size_t j = 0; j < peaks.size(); ++j)
      if (keep[j]) kept.push_back(peaks[j]);
    peaks = std::move(kept);
  }
  return peaks;
}

Segmentation detect_boundaries(const BoundaryScores& scores, const PeakOptions& options) {
  const auto& mu = scores.mu_b;
  const std::size_t n = static_cast<std::size_t>(mu.size()) + 1;
  if (n < 2) throw Error(ErrorCode::TooFewPatches, "boundary detection needs n >= 2");
  double threshold = 0.0;
  if (options.min_prominence) {
    threshold = *options.min_prominence;
  } else {
    const double mean = mu.mean();
    const double var = (mu.array() - mean).square().mean();
    threshold = mean + 1.0 * std::sqrt(var);
  }
  std::vector<std::size_t> boundaries;
  for (const auto& peak : find_peaks(mu, threshold, options.min_distance)) boundaries.push_back(peak.index + 1);
  return Segmentation::from_boundaries(n, std::move(boundaries));
}

namespace {

std::vector<int> kmeans_rows(const Matrix& points, int k) {
  const Eigen::Index m = points.rows();
  std::vector<Eigen::Index> seeds{0};
  while (static_cast<int>(seeds.size()) < k) {
    Eigen::Index best = 0;
    double best_d = -1.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      double d = std::numeric_limits<double>::infinity();
      for (Eigen::Index s : seeds) d = std::min(d, (points.row(i) - points.row(s)).squaredNorm());
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    seeds.push_back(best);
  }
  Matrix centers(k, points.cols());
  for (int c = 0; c < k; ++c) centers.row(c) = points.row(seeds[static_cast<std::size_t>(c)]);

  std::vector<int> labels(static_cast<std::size_t>(m), -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < m; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (points.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (labels[static_cast<std::size_t>(i)] != best) {
        labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    for (int c = 0; c < k; ++c) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(points.cols());
      int count = 0;
      for (Eigen::Index i = 0; i < m; ++i)
        if (labels[static_cast<std::size_t>(i)] == c) {
          sum += points.row(i);
          ++count;
        }
      if (count > 0) centers.row(c) = sum / count;
    }
  }
  return labels;
}

// Relabels in order of first appearance so labels are dense and segment 0 gets 0.
int compact_labels(std::vector<int>& labels) {
  std::vector<int> map;
  std::vector<int> seen;
  int next = 0;
  for (int& l : labels) {
    auto it = std::find(seen.begin(), seen.end(), l);
    if (it == seen.end()) {
      seen.push_back(l);
      map.push_back(next++);
      l = map.back();
    } else {
      l = map[static_cast<std::size_t>(it - seen.begin())];
    }
  }
  return next;
}

}  // namespace

std::vector<Vector> concept_prototypes(const Matrix& z, const std::vector<int>& patch_labels, int k) {
  require_dims(static_cast<std::size_t>(z.rows()) == patch_labels.size(), "latent rows != label count");
  std::vector<Vector> protos(static_cast<std::size_t>(k), Vector::Zero(z.cols()));
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < patch_labels.size(); ++i) {
    const int c = patch_labels[i];
    if (c < 0 || c >= k) throw Error(ErrorCode::UnknownConcept, "label " + std::to_string(c));
    protos[static_cast<std::size_t>(c)] += z.row(static_cast<Eigen::Index>(i)).transpose();
    ++counts[static_cast<std::size_t>(c)];
  }
  for (std::size_t c = 0; c < protos.size(); ++c)
    if (counts[c] > 0) protos[c] /= static_cast<double>(counts[c]);
  return protos;
}

ConceptMap cluster_segments(const Segmentation& segmentation, const Matrix& z, const Matrix& theta_s,
                            std::optional<int> k) {
  const auto& segs = segmentation.segments;
  if (segs.empty()) throw Error(ErrorCode::EmptySegments, "segmentation has no segments");
  const std::size_t n = segmentation.n;
  require_dims(static_cast<std::size_t>(z.rows()) == n, "latent rows != patch count");
  require_dims(static_cast<std::size_t>(theta_s.rows()) == n && theta_s.cols() == theta_s.rows(),
               "theta_s must be n x n");
  if (k && *k < 1) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
  for (const auto& [s, e] : segs)
    if (s < 1 || e > n || s > e) throw Error(ErrorCode::EmptySegments, "invalid segment range");

  const Matrix abs_theta = theta_s.cwiseAbs();
  const Matrix affinity = 0.5 * (abs_theta + abs_theta.transpose());
  const auto m = static_cast<Eigen::Index>(segs.size());
  Matrix seg_aff(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto [sa, ea] = segs[static_cast<std::size_t>(a)];
    for (Eigen::Index b = 0; b < m; ++b) {
      const auto [sb, eb] = segs[static_cast<std::size_t>(b)];
      const auto block = affinity.block(static_cast<Eigen::Index>(sa - 1), static_cast<Eigen::Index>(sb - 1),
                                        static_cast<Eigen::Index>(ea - sa + 1), static_cast<Eigen::Index>(eb - sb + 1));
      seg_aff(a, b) = block.mean();
    }
  }

  std::vector<int> labels(static_cast<std::size_t>(m), 0);
  if (m > 1) {
    const Vector degree = seg_aff.rowwise().sum();
    Vector inv_sqrt(m);
    for (Eigen::Index a = 0; a < m; ++a) inv_sqrt(a) = degree(a) > 0.0 ? 1.0 / std::sqrt(degree(a)) : 0.0;
    Eigen::MatrixXd normalized = inv_sqrt.asDiagonal() * seg_aff * inv_sqrt.asDiagonal();
    // A segment with no affinity at all is an isolated vertex, i.e. its own component.
    for (Eigen::Index a = 0; a < m; ++a)
      if (!(degree(a) > 0.0)) normalized(a, a) = 1.0;
    const Eigen::MatrixXd laplacian = Eigen::MatrixXd::Identity(m, m) - normalized;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(laplacian);
    const Vector& lambda = eig.eigenvalues();

    int chosen = 1;
    if (k) {
      chosen = std::min<int>(*k, static_cast<int>(m));
    } else {
      // Largest eigengap; the gap after the last eigenvalue is measured against 1,
      // the mean eigenvalue of a normalized Laplacian without self loops.
      double best_gap = -1.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double next = i + 1 < m ? lambda(i + 1) : 1.0;
        const double gap = std::max(next - lambda(i), 0.0);
        if (gap > best_gap) {
          best_gap = gap;
          chosen = static_cast<int>(i) + 1;
        }
      }
    }
    Matrix embedding = eig.eigenvectors().leftCols(chosen);
    for (Eigen::Index a = 0; a < m; ++a) {
      const double norm = embedding.row(a).norm();
      if (norm > 0.0) embedding.row(a) /= norm;
    }
    labels = kmeans_rows(embedding, chosen);
  }

  ConceptMap map;
  map.k = compact_labels(labels);
  map.segment_labels = labels;
  map.patch_labels.assign(n, 0);
  for (std::size_t a = 0; a < segs.size(); ++a)
    for (std::size_t i = segs[a].first; i <= segs[a].second; ++i) map.patch_labels[i - 1] = labels[a];
  map.prototypes = concept_prototypes(z, map.patch_labels, map.k);
  return map;
}

std::optional<DriftEvent> drift_monitor(const ConceptMap& concepts, const Vector& z_t, int current_concept,
                                        std::size_t patch_index) {
  if (current_concept < 0 || current_concept >= static_cast<int>(concepts.prototypes.size()))
    throw Error(ErrorCode::UnknownConcept, "concept " + std::to_string(current_concept));
  for (Eigen::Index i = 0; i < z_t.size(); ++i)
    if (!std::isfinite(z_t(i))) throw Error(ErrorCode::InvalidFormat, "latent vector has non-finite entries");
  const double current = (z_t - concepts.prototypes[static_cast<std::size_t>(current_concept)]).norm();
  int nearest = current_concept;
  double nearest_d = current;
  for (std::size_t c = 0; c < concepts.prototypes.size(); ++c) {
    require_dims(concepts.prototypes[c].size() == z_t.size(), "prototype dimension != latent dimension");
    const double d = (z_t - concepts.prototypes[c]).norm();
    if (d < nearest_d) {
      nearest_d = d;
      nearest = static_cast<int>(c);
    }
  }
  if (nearest == current_concept) return std::nullopt;
  return DriftEvent{patch_index, current_concept, nearest, current - nearest_d};
}

}  // namespace driftkan
