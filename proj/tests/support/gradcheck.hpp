#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "driftkan/rng.hpp"
#include "driftkan/selfrep.hpp"
#include "support/kan_fixtures.hpp"
#include "support/oracles.hpp"

namespace gradcheck {

struct Outcome {
  double worst = 0.0;     // max relative error over every parameter
  std::size_t checked = 0;
};

inline bool inputs_near_clamp(const driftkan::KanNetwork& net, const driftkan::Matrix& x, double margin) {
  driftkan::ForwardCache cache;
  driftkan::network_forward(net, x, &cache, driftkan::Backend::Serial);
  for (const auto& layer : cache.layers)
    for (Eigen::Index i = 0; i < layer.input.size(); ++i)
      if (std::abs(std::abs(layer.input.data()[i]) - 2.0) < margin) return true;
  return false;
}

// Draws a small model (every width <= 6, n <= 8, default grid) with random loss
// weights and a nonzero theta_s. Returns nullopt when some layer input lands near
// a clamp point, where the loss has a kink and finite differences are meaningless.
struct Problem {
  driftkan::Matrix p;
  driftkan::SelfRepModel model;
};

inline std::optional<Problem> draw_problem(driftkan::Rng& rng) {
  using driftkan::Matrix;
  const std::size_t dim = 1 + rng.next_u64() % 6;
  const std::size_t n = 2 + rng.next_u64() % 7;
  driftkan::ModelConfig mc;
  mc.hidden.clear();
  if (rng.next_u64() % 2) mc.hidden.push_back(1 + rng.next_u64() % 6);
  mc.latent_dim = 1 + rng.next_u64() % 6;
  const driftkan::LossWeights weights{rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)};
  Problem out{fixtures::random_matrix(rng, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim), -1.5, 1.5),
              driftkan::make_model(dim, n, mc, weights, rng.next_u64())};
  Matrix& theta = out.model.theta_s;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double magnitude = rng.uniform(0.05, 0.5);
    theta.data()[i] = rng.uniform() < 0.5 ? -magnitude : magnitude;
  }
  theta.diagonal().setZero();

  const double margin = 1e-3;
  const Matrix z = driftkan::encode(out.model, out.p, driftkan::Backend::Serial);
  if (inputs_near_clamp(out.model.encoder, out.p, margin)) return std::nullopt;
  if (inputs_near_clamp(out.model.decoder, theta.transpose() * z, margin)) return std::nullopt;
  return out;
}

// Compares the analytic gradient of the full objective with central differences.
// The step balances truncation against roundoff on losses of order 10; the floor
// keeps gradients near 1e-7, which carry only roundoff, from dominating the ratio.
inline Outcome check(Problem& problem, double eps_norm = 1e-8, double h = 3e-5, double floor = 1e-5) {
  using namespace driftkan;
  const auto analytic = evaluate_loss(problem.p, problem.model, eps_norm, true, Backend::Serial);
  auto loss = [&] { return evaluate_loss(problem.p, problem.model, eps_norm, false, Backend::Serial).loss.total; };
  Outcome out;
  ModelGradient grad = analytic.grad;
  for_each_block(problem.model, grad, [&](std::span<double> param, std::span<const double> g) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double fd = oracle::central_difference(&param[i], h, loss);
      out.worst = std::max(out.worst, oracle::relative_error(g[i], fd, floor));
      ++out.checked;
    }
  });
  return out;
}

}  // namespace gradcheck
