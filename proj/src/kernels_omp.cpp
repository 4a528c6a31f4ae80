#include <cstdint>

#include "kernels_common.hpp"

namespace driftkan::kernels::parallel {

void layer_forward(const KanLayer& layer, const Matrix& x, LayerCache& cache, Matrix& y) {
  prepare_cache(layer, x, cache);
  const std::size_t width = detail::window(layer);
  const std::size_t nb = layer.basis_count();
  y.resize(x.rows(), static_cast<Eigen::Index>(layer.out_dim));
  const auto rows = static_cast<std::int64_t>(x.rows());
  detail::dispatch_width(layer, [&]<std::size_t W>() {
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < rows; ++r) {
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
  const auto rows = static_cast<std::int64_t>(cache.input.rows());
  const auto outs = static_cast<std::int64_t>(layer.out_dim);
  if (dx) dx->setZero(rows, static_cast<Eigen::Index>(layer.in_dim));

  detail::dispatch_width(layer, [&]<std::size_t W>() {
    // Parameter gradients: each output unit owns its edges, rows summed in order.
#pragma omp parallel for schedule(static)
    for (std::int64_t q = 0; q < outs; ++q) {
      for (std::size_t p = 0; p < layer.in_dim; ++p) {
        const std::size_t e = layer.edge(static_cast<std::size_t>(q), p);
        for (std::int64_t r = 0; r < rows; ++r)
          detail::accumulate_edge_grad<W>(layer, cache, static_cast<std::size_t>(r) * layer.in_dim + p, e, dy(r, q),
                                          grad);
      }
    }

    if (!dx) return;
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < rows; ++r) {
      const std::size_t row_cell = static_cast<std::size_t>(r) * layer.in_dim;
      for (std::size_t q = 0; q < layer.out_dim; ++q) {
        const double g = dy(r, static_cast<Eigen::Index>(q));
        for (std::size_t p = 0; p < layer.in_dim; ++p)
          (*dx)(r, static_cast<Eigen::Index>(p)) +=
              detail::edge_input_grad<W>(layer, cache, row_cell + p, layer.edge(q, p), g);
      }
    }
  });
}

}  // namespace driftkan::kernels::parallel
