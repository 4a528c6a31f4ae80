#include <array>

#include "driftkan/error.hpp"
#include "kernels_common.hpp"

namespace driftkan::kernels {

void prepare_cache(const KanLayer& layer, const Matrix& x, LayerCache& cache) {
  require_dims(static_cast<std::size_t>(x.cols()) == layer.in_dim, "layer input width");
  const auto cells = static_cast<std::size_t>(x.rows()) * layer.in_dim;
  const std::size_t width = detail::window(layer);
  cache.input = x;
  cache.first.assign(cells, 0);
  cache.basis.assign(cells * width, 0.0);
  cache.dbasis.assign(cells * width, 0.0);
  cache.silu.assign(cells, 0.0);
  cache.dsilu.assign(cells, 0.0);
}

void fill_row_cache(const KanLayer& layer, const Matrix& x, Eigen::Index row, LayerCache& cache) {
  const std::size_t width = detail::window(layer);
  const auto r = static_cast<std::size_t>(row);
  for (std::size_t p = 0; p < layer.in_dim; ++p) {
    const std::size_t cell = r * layer.in_dim + p;
    const double v = x(row, static_cast<Eigen::Index>(p));
    double* basis = cache.basis.data() + cell * width;
    double* dbasis = cache.dbasis.data() + cell * width;
    cache.first[cell] = eval_basis_local(layer.grid, v, basis, dbasis);
    // Clamped inputs see a constant spline.
    if (v < layer.grid.t_min || v > layer.grid.t_max)
      for (std::size_t i = 0; i < width; ++i) dbasis[i] = 0.0;
    cache.silu[cell] = silu(v);
    cache.dsilu[cell] = silu_derivative(v);
  }
}

namespace serial {

void layer_forward(const KanLayer& layer, const Matrix& x, LayerCache& cache, Matrix& y) {
  prepare_cache(layer, x, cache);
  const std::size_t width = detail::window(layer);
  const std::size_t nb = layer.basis_count();
  y.resize(x.rows(), static_cast<Eigen::Index>(layer.out_dim));
  detail::dispatch_width(layer, [&]<std::size_t W>() {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      fill_row_cache(layer, x, r, cache);
      const std::size_t row_cell = static_cast<std::size_t>(r) * layer.in_dim;
      for (std::size_t q = 0; q < layer.out_dim; ++q) {
        double acc = 0.0;
        for (std::size_t p = 0; p < layer.in_dim; ++p) {
          const std::size_t cell = row_cell + p;
          const std::size_t e = layer.edge(q, p);
          const double spline = detail::spline_value<W>(
              layer.coeffs.data() + e * nb + static_cast<std::size_t>(cache.first[cell]),
              cache.basis.data() + cell * width, width);
          acc += detail::edge_value(layer.base[e], layer.scale[e], cache.silu[cell], spline);
        }
        y(r, static_cast<Eigen::Index>(q)) = acc;
      }
    }
  });
}

void layer_backward(const KanLayer& layer, const LayerCache& cache, const Matrix& dy, LayerGradient& grad,
                    Matrix* dx) {
  detail::zero_like(layer, grad);
  const Eigen::Index rows = cache.input.rows();
  if (dx) dx->setZero(rows, static_cast<Eigen::Index>(layer.in_dim));
  detail::dispatch_width(layer, [&]<std::size_t W>() {
    for (Eigen::Index r = 0; r < rows; ++r) {
      const std::size_t row_cell = static_cast<std::size_t>(r) * layer.in_dim;
      for (std::size_t q = 0; q < layer.out_dim; ++q) {
        const double g = dy(r, static_cast<Eigen::Index>(q));
        for (std::size_t p = 0; p < layer.in_dim; ++p) {
          const std::size_t e = layer.edge(q, p);
          detail::accumulate_edge_grad<W>(layer, cache, row_cell + p, e, g, grad);
          if (dx)
            (*dx)(r, static_cast<Eigen::Index>(p)) += detail::edge_input_grad<W>(layer, cache, row_cell + p, e, g);
        }
      }
    }
  });
}

}  // namespace serial
}  // namespace driftkan::kernels
