#include "driftkan/kan.hpp"

#include <cmath>
#include <string>

#include "driftkan/error.hpp"
#include "driftkan/kernels.hpp"
#include "driftkan/rng.hpp"

namespace driftkan {

double silu(double x) { return x / (1.0 + std::exp(-x)); }

double silu_derivative(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

KanLayer KanLayer::zeros(std::size_t in_dim, std::size_t out_dim, const SplineGrid& grid) {
  KanLayer layer;
  layer.in_dim = in_dim;
  layer.out_dim = out_dim;
  layer.grid = grid;
  layer.coeffs.assign(in_dim * out_dim * static_cast<std::size_t>(grid.basis_count()), 0.0);
  layer.base.assign(in_dim * out_dim, 0.0);
  layer.scale.assign(in_dim * out_dim, 0.0);
  return layer;
}

std::vector<std::size_t> KanNetwork::dims() const {
  std::vector<std::size_t> d;
  if (layers.empty()) return d;
  d.push_back(layers.front().in_dim);
  for (const auto& layer : layers) d.push_back(layer.out_dim);
  return d;
}

std::size_t KanNetwork::parameter_count() const {
  std::size_t total = 0;
  for (const auto& layer : layers) total += layer.parameter_count();
  return total;
}

void validate(const KanNetwork& net) {
  if (net.layers.empty()) throw Error(ErrorCode::InvalidDims, "network has no layers");
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& layer = net.layers[i];
    if (layer.in_dim == 0 || layer.out_dim == 0)
      throw Error(ErrorCode::InvalidDims, "layer " + std::to_string(i) + " has a zero dimension");
    if (i + 1 < net.layers.size() && layer.out_dim != net.layers[i + 1].in_dim)
      throw Error(ErrorCode::InvalidDims, "layer " + std::to_string(i) + " out_dim != next in_dim");
    const std::size_t edges = layer.in_dim * layer.out_dim;
    if (layer.grid.knots.size() != static_cast<std::size_t>(layer.grid.intervals + 2 * layer.grid.order + 1))
      throw Error(ErrorCode::InvalidFormat, "layer " + std::to_string(i) + " knot vector length");
    if (layer.coeffs.size() != edges * layer.basis_count() || layer.base.size() != edges ||
        layer.scale.size() != edges)
      throw Error(ErrorCode::InvalidFormat, "layer " + std::to_string(i) + " parameter shapes");
    for (const auto* v : {&layer.coeffs, &layer.base, &layer.scale})
      for (double x : *v)
        if (!std::isfinite(x)) throw Error(ErrorCode::InvalidFormat, "non-finite parameter in layer " + std::to_string(i));
  }
}

Vector layer_forward(const KanLayer& layer, const Vector& x) {
  require_dims(static_cast<std::size_t>(x.size()) == layer.in_dim,
               "input length " + std::to_string(x.size()) + " != in_dim " + std::to_string(layer.in_dim));
  Matrix row = x.transpose();
  LayerCache cache;
  Matrix y;
  kernels::serial::layer_forward(layer, row, cache, y);
  return y.row(0).transpose();
}

Matrix network_forward(const KanNetwork& net, const Matrix& x, ForwardCache* cache, Backend backend) {
  if (net.layers.empty()) throw Error(ErrorCode::InvalidDims, "network has no layers");
  require_dims(static_cast<std::size_t>(x.cols()) == net.in_dim(),
               "input has " + std::to_string(x.cols()) + " columns, network expects " +
                   std::to_string(net.in_dim()));
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.layers.assign(net.layers.size(), LayerCache{});
  Matrix current = x;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    Matrix next;
    if (backend == Backend::Serial)
      kernels::serial::layer_forward(net.layers[i], current, c.layers[i], next);
    else
      kernels::parallel::layer_forward(net.layers[i], current, c.layers[i], next);
    current = std::move(next);
  }
  c.output = current;
  return current;
}

GradientBundle network_backward(const KanNetwork& net, const ForwardCache& cache, const Matrix& d_output,
                                Backend backend, bool input_gradient) {
  if (cache.layers.size() != net.layers.size())
    throw Error(ErrorCode::CacheMismatch, "cache has " + std::to_string(cache.layers.size()) + " layers");
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& lc = cache.layers[i];
    if (static_cast<std::size_t>(lc.input.cols()) != net.layers[i].in_dim ||
        lc.first.size() != static_cast<std::size_t>(lc.input.rows()) * net.layers[i].in_dim)
      throw Error(ErrorCode::CacheMismatch, "cache layer " + std::to_string(i) + " does not match network");
  }
  if (d_output.rows() != cache.output.rows() || static_cast<std::size_t>(d_output.cols()) != net.out_dim())
    throw Error(ErrorCode::CacheMismatch, "upstream gradient shape does not match the cached forward pass");

  GradientBundle grad;
  grad.layers.resize(net.layers.size());
  Matrix upstream = d_output;
  for (std::size_t i = net.layers.size(); i-- > 0;) {
    Matrix dx;
    Matrix* dx_out = (i > 0 || input_gradient) ? &dx : nullptr;
    if (backend == Backend::Serial)
      kernels::serial::layer_backward(net.layers[i], cache.layers[i], upstream, grad.layers[i], dx_out);
    else
      kernels::parallel::layer_backward(net.layers[i], cache.layers[i], upstream, grad.layers[i], dx_out);
    upstream = std::move(dx);
  }
  grad.input = std::move(upstream);
  return grad;
}

GradientBundle zero_gradient(const KanNetwork& net) {
  GradientBundle g;
  for (const auto& layer : net.layers)
    g.layers.push_back({std::vector<double>(layer.coeffs.size(), 0.0), std::vector<double>(layer.base.size(), 0.0),
                        std::vector<double>(layer.scale.size(), 0.0)});
  return g;
}

KanNetwork init_network(std::span<const std::size_t> dims, const GridConfig& grid_config, std::uint64_t seed) {
  if (dims.size() < 2) throw Error(ErrorCode::InvalidDims, "need at least an input and an output width");
  for (std::size_t d : dims)
    if (d == 0) throw Error(ErrorCode::InvalidDims, "layer widths must be positive");
  const SplineGrid grid = SplineGrid::make(grid_config.t_min, grid_config.t_max, grid_config.intervals, grid_config.order);
  Rng rng(seed);
  KanNetwork net;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    KanLayer layer = KanLayer::zeros(dims[i], dims[i + 1], grid);
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[i]));
    for (auto& b : layer.base) b = rng.uniform(-bound, bound);
    for (auto& c : layer.coeffs) c = rng.normal(0.0, 0.1);
    for (auto& s : layer.scale) s = 1.0;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::vector<double> sample_edge_activation(const KanLayer& layer, std::size_t q, std::size_t p,
                                           std::span<const double> xs) {
  if (q >= layer.out_dim || p >= layer.in_dim)
    throw Error(ErrorCode::IndexOutOfRange,
                "edge (" + std::to_string(q) + ", " + std::to_string(p) + ") outside " +
                    std::to_string(layer.out_dim) + "x" + std::to_string(layer.in_dim));
  const std::size_t e = layer.edge(q, p);
  const std::size_t nb = layer.basis_count();
  std::vector<double> out;
  out.reserve(xs.size());
  std::vector<double> local(static_cast<std::size_t>(layer.grid.order) + 1);
  for (double x : xs) {
    const int first = eval_basis_local(layer.grid, x, local.data());
    double spline = 0.0;
    for (std::size_t i = 0; i < local.size(); ++i)
      spline += layer.coeffs[e * nb + static_cast<std::size_t>(first) + i] * local[i];
    out.push_back(layer.base[e] * silu(x) + layer.scale[e] * spline);
  }
  return out;
}

}  // namespace driftkan
