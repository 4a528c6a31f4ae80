#pragma once

#include <cstdint>
#include <vector>

#include "driftkan/kan.hpp"
#include "driftkan/patching.hpp"
#include "driftkan/types.hpp"

namespace driftkan {

// lambda1 (sparsity), lambda2 (self-expression residual), lambda3 (temporal smoothness).
// Defaults were tuned on the three-regime synthetic stream used by the acceptance suite.
struct LossWeights {
  double sparsity = 10.0;
  double selfrep = 10.0;
  double smoothness = 10.0;
};

struct ModelConfig {
  std::vector<std::size_t> hidden = {64, 32};  // encoder hidden widths; decoder mirrors them
  std::size_t latent_dim = 16;
  GridConfig grid;
};

// Patches are rows of P (n x D) and of the latent Z (n x d). Column i of theta_s
// holds the weights that rebuild latent row i: Z_hat = theta_s^T Z.
struct SelfRepModel {
  KanNetwork encoder;
  KanNetwork decoder;
  Matrix theta_s;  // n x n, zero diagonal
  LossWeights weights;

  std::size_t n() const { return static_cast<std::size_t>(theta_s.rows()); }
  std::size_t latent_dim() const { return encoder.out_dim(); }
  std::size_t patch_dim() const { return encoder.in_dim(); }
};

struct LossComponents {
  double reconstruction = 0.0;
  double sparsity = 0.0;   // unweighted
  double selfrep = 0.0;    // unweighted
  double smoothness = 0.0; // unweighted
  double total = 0.0;
};

struct ModelGradient {
  GradientBundle encoder;
  GradientBundle decoder;
  Matrix theta_s;
};

// Columns e_{j+1} - e_j, so (theta_s R)[:, j] = theta_{j+1} - theta_j.
Matrix difference_matrix(std::size_t n);

double reconstruction_loss(const Matrix& p, const Matrix& p_hat);
double selfrep_residual_loss(const Matrix& z, const Matrix& theta_s);
double sparsity_penalty(const Matrix& theta_s, double eps_norm);
double smoothness_penalty(const Matrix& theta_s, const Matrix& r, double eps_norm);

SelfRepModel make_model(std::size_t patch_dim, std::size_t n, const ModelConfig& config, const LossWeights& weights,
                        std::uint64_t seed);

Matrix encode(const SelfRepModel& model, const Matrix& p, Backend backend = Backend::Parallel);

struct LossEvaluation {
  LossComponents loss;
  Matrix latent;          // Z
  Matrix reconstruction;  // P_hat
  ModelGradient grad;     // filled when requested
};

LossComponents total_loss(const Matrix& p, const SelfRepModel& model, double eps_norm = 1e-8);

// With `frozen_latent`, Z is taken as given instead of enc(P) and the encoder
// gradient is returned as zeros.
LossEvaluation evaluate_loss(const Matrix& p, const SelfRepModel& model, double eps_norm, bool with_gradient,
                             Backend backend = Backend::Parallel, const Matrix* frozen_latent = nullptr);

// Plain autoencoder objective 0.5||P - dec(enc(P))||^2 used by optional pretraining.
LossEvaluation evaluate_autoencoder(const Matrix& p, const SelfRepModel& model, bool with_gradient,
                                    Backend backend = Backend::Parallel);

struct TrainConfig {
  std::size_t epochs = 50;  // joint epochs
  // Staged schedule, run in this order before the joint epochs: autoencoder-only
  // epochs, then epochs that update theta_s alone on the frozen latent codes.
  // Setting both to 0 gives plain joint training.
  std::size_t pretrain_epochs = 100;
  std::size_t theta_epochs = 300;
  double learning_rate = 1e-2;
  // Step size for theta_s; 0 reuses learning_rate. The self-representation term
  // is stiff in theta_s, and a step of 1e-2 makes the loss oscillate.
  double theta_learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  LossWeights weights;
  std::uint64_t seed = 0;
  double eps_norm = 1e-8;
  double tolerance = 1e-6;
  std::size_t patience = 50;
};

struct TrainReport {
  std::vector<LossComponents> trace;  // one entry per theta-stage or joint epoch
  double wall_seconds = 0.0;
  double final_grad_norm = 0.0;
  bool converged = false;
};

void validate(const TrainConfig& config);

std::pair<SelfRepModel, TrainReport> train(const PatchSet& patches, const TrainConfig& config,
                                           const ModelConfig& model_config = {},
                                           Backend backend = Backend::Parallel);

// Visits (parameter, gradient) blocks in a fixed order: encoder, decoder, theta_s.
template <typename F>
void for_each_block(SelfRepModel& model, ModelGradient& grad, F&& f) {
  auto visit_net = [&](KanNetwork& net, GradientBundle& g) {
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      f(std::span<double>(net.layers[i].coeffs), std::span<const double>(g.layers[i].coeffs));
      f(std::span<double>(net.layers[i].base), std::span<const double>(g.layers[i].base));
      f(std::span<double>(net.layers[i].scale), std::span<const double>(g.layers[i].scale));
    }
  };
  visit_net(model.encoder, grad.encoder);
  visit_net(model.decoder, grad.decoder);
  f(std::span<double>(model.theta_s.data(), static_cast<std::size_t>(model.theta_s.size())),
    std::span<const double>(grad.theta_s.data(), static_cast<std::size_t>(grad.theta_s.size())));
}

}  // namespace driftkan
