#pragma once

#include <cstddef>
#include <vector>

namespace driftkan {

inline constexpr int kMaxSplineOrder = 8;

// Clamped knot vector over [t_min, t_max]: G uniform intervals, end knots repeated
// k extra times, so there are G + 2k + 1 knots and G + k basis functions.
struct SplineGrid {
  double t_min = -2.0;
  double t_max = 2.0;
  int intervals = 5;  // G
  int order = 3;      // k (polynomial degree)
  std::vector<double> knots;

  static SplineGrid make(double t_min, double t_max, int intervals, int order);

  int basis_count() const { return intervals + order; }
  double clamp(double x) const { return x < t_min ? t_min : (x > t_max ? t_max : x); }
  bool operator==(const SplineGrid& other) const = default;
};

// Cox-de Boor on the k+1 basis functions that are nonzero at clamp(x).
// Writes values[0..k] (and, if non-null, their x-derivatives) for basis indices
// first..first+k and returns `first`.
int eval_basis_local(const SplineGrid& grid, double x, double* values, double* derivs = nullptr);

// Dense basis vector of length G + k.
std::vector<double> bspline_basis(double x, const SplineGrid& grid);
// Zero outside [t_min, t_max], where the clamped basis is constant.
std::vector<double> bspline_basis_derivative(double x, const SplineGrid& grid);

}  // namespace driftkan
