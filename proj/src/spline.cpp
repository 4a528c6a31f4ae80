#include "driftkan/spline.hpp"

#include <array>
#include <string>

#include "driftkan/error.hpp"

namespace driftkan {

SplineGrid SplineGrid::make(double t_min, double t_max, int intervals, int order) {
  if (!(t_min < t_max)) throw Error(ErrorCode::InvalidConfig, "spline grid needs t_min < t_max");
  if (intervals < 1) throw Error(ErrorCode::InvalidConfig, "spline grid needs G >= 1");
  if (order < 1 || order > kMaxSplineOrder)
    throw Error(ErrorCode::InvalidConfig, "spline order must lie in [1, " + std::to_string(kMaxSplineOrder) + "]");
  SplineGrid g;
  g.t_min = t_min;
  g.t_max = t_max;
  g.intervals = intervals;
  g.order = order;
  g.knots.reserve(static_cast<std::size_t>(intervals + 2 * order + 1));
  const double h = (t_max - t_min) / intervals;
  for (int i = 0; i < order; ++i) g.knots.push_back(t_min);
  for (int i = 0; i <= intervals; ++i) g.knots.push_back(i == intervals ? t_max : t_min + i * h);
  for (int i = 0; i < order; ++i) g.knots.push_back(t_max);
  return g;
}

int eval_basis_local(const SplineGrid& grid, double x, double* values, double* derivs) {
  const int k = grid.order;
  const auto& t = grid.knots;
  const double u = grid.clamp(x);

  // Knot span s with t[s] <= u < t[s+1]; the right end belongs to the last interval.
  const double h = (grid.t_max - grid.t_min) / grid.intervals;
  int interval = static_cast<int>((u - grid.t_min) / h);
  if (interval >= grid.intervals) interval = grid.intervals - 1;
  if (interval < 0) interval = 0;
  int s = k + interval;
  while (s > k && u < t[static_cast<std::size_t>(s)]) --s;
  while (s < k + grid.intervals - 1 && u >= t[static_cast<std::size_t>(s + 1)]) ++s;

  std::array<double, kMaxSplineOrder + 1> left{}, right{}, basis{};
  basis[0] = 1.0;
  for (int j = 1; j <= k; ++j) {
    if (j == k && derivs) {
      // Degree k-1 values are complete here; order reduction gives the derivative.
      for (int r = 0; r <= k; ++r) {
        const int i = s - k + r;
        double d = 0.0;
        if (r >= 1) {
          const double den = t[static_cast<std::size_t>(i + k)] - t[static_cast<std::size_t>(i)];
          if (den > 0.0) d += k * basis[static_cast<std::size_t>(r - 1)] / den;
        }
        if (r <= k - 1) {
          const double den = t[static_cast<std::size_t>(i + k + 1)] - t[static_cast<std::size_t>(i + 1)];
          if (den > 0.0) d -= k * basis[static_cast<std::size_t>(r)] / den;
        }
        derivs[r] = d;
      }
    }
    left[static_cast<std::size_t>(j)] = u - t[static_cast<std::size_t>(s + 1 - j)];
    right[static_cast<std::size_t>(j)] = t[static_cast<std::size_t>(s + j)] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double den = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
      const double temp = basis[static_cast<std::size_t>(r)] / den;
      basis[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * temp;
      saved = left[static_cast<std::size_t>(j - r)] * temp;
    }
    basis[static_cast<std::size_t>(j)] = saved;
  }
  if (derivs && k == 0) derivs[0] = 0.0;
  for (int r = 0; r <= k; ++r) values[r] = basis[static_cast<std::size_t>(r)];
  return s - k;
}

std::vector<double> bspline_basis(double x, const SplineGrid& grid) {
  std::vector<double> out(static_cast<std::size_t>(grid.basis_count()), 0.0);
  std::array<double, kMaxSplineOrder + 1> local{};
  const int first = eval_basis_local(grid, x, local.data());
  for (int r = 0; r <= grid.order; ++r) out[static_cast<std::size_t>(first + r)] = local[static_cast<std::size_t>(r)];
  return out;
}

std::vector<double> bspline_basis_derivative(double x, const SplineGrid& grid) {
  std::vector<double> out(static_cast<std::size_t>(grid.basis_count()), 0.0);
  if (x < grid.t_min || x > grid.t_max) return out;  // clamped region is flat
  std::array<double, kMaxSplineOrder + 1> local{}, deriv{};
  const int first = eval_basis_local(grid, x, local.data(), deriv.data());
  for (int r = 0; r <= grid.order; ++r) out[static_cast<std::size_t>(first + r)] = deriv[static_cast<std::size_t>(r)];
  return out;
}

}  // namespace driftkan
