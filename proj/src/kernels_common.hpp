#pragma once

#include "driftkan/kernels.hpp"

// Per-element arithmetic shared by both kernel backends so that each value is
// produced by the exact same floating-point expression.
namespace driftkan::kernels::detail {

inline std::size_t window(const KanLayer& layer) { return static_cast<std::size_t>(layer.grid.order) + 1; }

// kWidth > 0 fixes the window at compile time (order 3 is the common case);
// 0 falls back to the runtime width. Both sum in ascending order.
template <std::size_t kWidth = 0>
inline double spline_value(const double* coeffs, const double* basis, std::size_t width) {
  const std::size_t w = kWidth > 0 ? kWidth : width;
  double s = 0.0;
  for (std::size_t i = 0; i < w; ++i) s += coeffs[i] * basis[i];
  return s;
}

inline double edge_value(double base, double scale, double silu, double spline) {
  return base * silu + scale * spline;
}

// Accumulates the parameter gradient of edge e for one row.
template <std::size_t kWidth = 0>
inline void accumulate_edge_grad(const KanLayer& layer, const LayerCache& cache, std::size_t cell,
                                 std::size_t e, double g, LayerGradient& grad) {
  const std::size_t width = kWidth > 0 ? kWidth : window(layer);
  const std::size_t nb = layer.basis_count();
  const double* basis = cache.basis.data() + cell * width;
  const std::size_t c0 = e * nb + static_cast<std::size_t>(cache.first[cell]);
  const double spline = spline_value<kWidth>(layer.coeffs.data() + c0, basis, width);
  grad.base[e] += g * cache.silu[cell];
  grad.scale[e] += g * spline;
  const double gs = g * layer.scale[e];
  for (std::size_t i = 0; i < width; ++i) grad.coeffs[c0 + i] += gs * basis[i];
}

// d phi_e / dx for one row, times the upstream gradient g.
template <std::size_t kWidth = 0>
inline double edge_input_grad(const KanLayer& layer, const LayerCache& cache, std::size_t cell, std::size_t e,
                              double g) {
  const std::size_t width = kWidth > 0 ? kWidth : window(layer);
  const std::size_t nb = layer.basis_count();
  const double* dbasis = cache.dbasis.data() + cell * width;
  const std::size_t c0 = e * nb + static_cast<std::size_t>(cache.first[cell]);
  const double dspline = spline_value<kWidth>(layer.coeffs.data() + c0, dbasis, width);
  return g * edge_value(layer.base[e], layer.scale[e], cache.dsilu[cell], dspline);
}

// Calls f.template operator()<W>() with W = 4 for cubic splines, else 0.
template <typename F>
inline void dispatch_width(const KanLayer& layer, F&& f) {
  if (window(layer) == 4)
    f.template operator()<4>();
  else
    f.template operator()<0>();
}

inline void zero_like(const KanLayer& layer, LayerGradient& grad) {
  grad.coeffs.assign(layer.coeffs.size(), 0.0);
  grad.base.assign(layer.base.size(), 0.0);
  grad.scale.assign(layer.scale.size(), 0.0);
}

}  // namespace driftkan::kernels::detail
