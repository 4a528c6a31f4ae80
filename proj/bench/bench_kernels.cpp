// Serial reference kernels against the OpenMP ones on encoder-sized layers.
#include <benchmark/benchmark.h>

#include <array>

#include "driftkan/kernels.hpp"
#include "driftkan/rng.hpp"
#include "driftkan/selfrep.hpp"

namespace {

using namespace driftkan;

struct LayerFixture {
  KanLayer layer;
  Matrix x;
  Matrix dy;

  LayerFixture(std::size_t rows, std::size_t in, std::size_t out) {
    const std::array<std::size_t, 2> dims{in, out};
    layer = init_network(dims, GridConfig{}, 7).layers.front();
    Rng rng(11);
    x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(in));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-2.5, 2.5);
    dy.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(out));
    for (Eigen::Index i = 0; i < dy.size(); ++i) dy.data()[i] = rng.normal();
  }
};

template <typename Forward>
void run_forward(benchmark::State& state, Forward forward) {
  LayerFixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)),
                 static_cast<std::size_t>(state.range(2)));
  LayerCache cache;
  Matrix y;
  for (auto _ : state) {
    forward(f.layer, f.x, cache, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <typename Forward, typename Backward>
void run_backward(benchmark::State& state, Forward forward, Backward backward) {
  LayerFixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)),
                 static_cast<std::size_t>(state.range(2)));
  LayerCache cache;
  Matrix y, dx;
  forward(f.layer, f.x, cache, y);
  LayerGradient grad;
  for (auto _ : state) {
    backward(f.layer, cache, f.dy, grad, &dx);
    benchmark::DoNotOptimize(dx.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ForwardSerial(benchmark::State& s) { run_forward(s, kernels::serial::layer_forward); }
void BM_ForwardParallel(benchmark::State& s) { run_forward(s, kernels::parallel::layer_forward); }
void BM_BackwardSerial(benchmark::State& s) {
  run_backward(s, kernels::serial::layer_forward, kernels::serial::layer_backward);
}
void BM_BackwardParallel(benchmark::State& s) {
  run_backward(s, kernels::parallel::layer_forward, kernels::parallel::layer_backward);
}

void BM_LossGradient(benchmark::State& state) {
  const auto backend = state.range(0) == 0 ? Backend::Serial : Backend::Parallel;
  const std::size_t n = 60, dim = 200;
  const SelfRepModel model = make_model(dim, n, ModelConfig{}, LossWeights{}, 3);
  Rng rng(5);
  Matrix p(n, dim);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = rng.normal();
  for (auto _ : state) {
    auto eval = evaluate_loss(p, model, 1e-8, true, backend);
    benchmark::DoNotOptimize(eval.loss.total);
  }
  state.SetLabel(backend == Backend::Serial ? "serial" : "parallel");
}

#define LAYER_SHAPES Args({60, 200, 64})->Args({60, 64, 32})->Args({240, 200, 64})

BENCHMARK(BM_ForwardSerial)->LAYER_SHAPES;
BENCHMARK(BM_ForwardParallel)->LAYER_SHAPES;
BENCHMARK(BM_BackwardSerial)->LAYER_SHAPES;
BENCHMARK(BM_BackwardParallel)->LAYER_SHAPES;
BENCHMARK(BM_LossGradient)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
