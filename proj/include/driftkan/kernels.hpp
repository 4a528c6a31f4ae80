#pragma once

#include "driftkan/kan.hpp"

// Batched KAN layer kernels. `serial` is the straightforward reference; `parallel`
// spreads rows (forward, input gradient) or output units (parameter gradient) over
// OpenMP threads. Every output element is accumulated in the same order by both,
// so results are bit-identical regardless of thread count.
namespace driftkan::kernels {

namespace serial {
void layer_forward(const KanLayer& layer, const Matrix& x, LayerCache& cache, Matrix& y);
void layer_backward(const KanLayer& layer, const LayerCache& cache, const Matrix& dy, LayerGradient& grad,
                    Matrix* dx);
}  // namespace serial

namespace parallel {
void layer_forward(const KanLayer& layer, const Matrix& x, LayerCache& cache, Matrix& y);
void layer_backward(const KanLayer& layer, const LayerCache& cache, const Matrix& dy, LayerGradient& grad,
                    Matrix* dx);
}  // namespace parallel

// Shared by both backends: fills the per-input part of the cache for one row.
void fill_row_cache(const KanLayer& layer, const Matrix& x, Eigen::Index row, LayerCache& cache);
void prepare_cache(const KanLayer& layer, const Matrix& x, LayerCache& cache);

}  // namespace driftkan::kernels
