#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "driftkan/spline.hpp"
#include "driftkan/types.hpp"

namespace driftkan {

struct GridConfig {
  double t_min = -2.0;
  double t_max = 2.0;
  int intervals = 5;
  int order = 3;
};

// Edge (q, p) computes
//   phi(x) = base(q,p) * silu(x) + scale(q,p) * sum_j coeff(q,p,j) * B_j(clamp(x))
// and output q sums its edges in ascending p.
struct KanLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  SplineGrid grid;
  std::vector<double> coeffs;  // out x in x (G+k)
  std::vector<double> base;    // out x in
  std::vector<double> scale;   // out x in

  static KanLayer zeros(std::size_t in_dim, std::size_t out_dim, const SplineGrid& grid);

  std::size_t basis_count() const { return static_cast<std::size_t>(grid.basis_count()); }
  std::size_t edge(std::size_t q, std::size_t p) const { return q * in_dim + p; }
  double& coeff(std::size_t q, std::size_t p, std::size_t j) { return coeffs[edge(q, p) * basis_count() + j]; }
  double coeff(std::size_t q, std::size_t p, std::size_t j) const { return coeffs[edge(q, p) * basis_count() + j]; }
  std::size_t parameter_count() const { return coeffs.size() + base.size() + scale.size(); }
};

struct KanNetwork {
  std::vector<KanLayer> layers;

  std::size_t in_dim() const { return layers.empty() ? 0 : layers.front().in_dim; }
  std::size_t out_dim() const { return layers.empty() ? 0 : layers.back().out_dim; }
  std::vector<std::size_t> dims() const;
  std::size_t parameter_count() const;
};

// Per-layer activations retained for the backward pass.
struct LayerCache {
  Matrix input;                 // rows x in
  std::vector<int> first;       // rows x in: first nonzero basis index
  std::vector<double> basis;    // rows x in x (k+1)
  std::vector<double> dbasis;   // rows x in x (k+1), zero where the input was clamped
  std::vector<double> silu;     // rows x in
  std::vector<double> dsilu;    // rows x in
};

struct ForwardCache {
  std::vector<LayerCache> layers;
  Matrix output;
};

struct LayerGradient {
  std::vector<double> coeffs;
  std::vector<double> base;
  std::vector<double> scale;
};

struct GradientBundle {
  std::vector<LayerGradient> layers;
  Matrix input;  // dL/dX
};

enum class Backend { Serial, Parallel };

double silu(double x);
double silu_derivative(double x);

Vector layer_forward(const KanLayer& layer, const Vector& x);

Matrix network_forward(const KanNetwork& net, const Matrix& x, ForwardCache* cache = nullptr,
                       Backend backend = Backend::Parallel);

// With input_gradient = false the returned `input` matrix is left empty.
GradientBundle network_backward(const KanNetwork& net, const ForwardCache& cache, const Matrix& d_output,
                                Backend backend = Backend::Parallel, bool input_gradient = true);

KanNetwork init_network(std::span<const std::size_t> dims, const GridConfig& grid, std::uint64_t seed);

std::vector<double> sample_edge_activation(const KanLayer& layer, std::size_t q, std::size_t p,
                                           std::span<const double> xs);

void validate(const KanNetwork& net);

GradientBundle zero_gradient(const KanNetwork& net);

}  // namespace driftkan
