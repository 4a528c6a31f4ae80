#include "driftkan/selfrep.hpp"

#include <cmath>
#include <string>

#include "driftkan/error.hpp"
#include "driftkan/rng.hpp"

namespace driftkan {

Matrix difference_matrix(std::size_t n) {
  if (n < 2) throw Error(ErrorCode::TooFewPatches, "difference matrix needs n >= 2, got " + std::to_string(n));
  const auto size = static_cast<Eigen::Index>(n);
  Matrix r = Matrix::Zero(size, size - 1);
  for (Eigen::Index j = 0; j + 1 < size; ++j) {
    r(j, j) = -1.0;
    r(j + 1, j) = 1.0;
  }
  return r;
}

double reconstruction_loss(const Matrix& p, const Matrix& p_hat) {
  require_dims(p.rows() == p_hat.rows() && p.cols() == p_hat.cols(), "P and P_hat shapes differ");
  return 0.5 * (p - p_hat).squaredNorm();
}

double selfrep_residual_loss(const Matrix& z, const Matrix& theta_s) {
  require_dims(theta_s.rows() == theta_s.cols() && theta_s.rows() == z.rows(),
               "theta_s must be n x n with n = latent rows");
  return (z - theta_s.transpose() * z).squaredNorm();
}

double sparsity_penalty(const Matrix& theta_s, double eps_norm) {
  const double eps2 = eps_norm * eps_norm;
  double total = 0.0;
  for (Eigen::Index i = 0; i < theta_s.size(); ++i) {
    const double v = theta_s.data()[i];
    total += std::sqrt(v * v + eps2) - eps_norm;
  }
  return total;
}

double smoothness_penalty(const Matrix& theta_s, const Matrix& r, double eps_norm) {
  require_dims(theta_s.cols() == r.rows(), "theta_s columns != R rows");
  const Matrix diff = theta_s * r;
  const double eps2 = eps_norm * eps_norm;
  double total = 0.0;
  for (Eigen::Index j = 0; j < diff.cols(); ++j) total += std::sqrt(diff.col(j).squaredNorm() + eps2) - eps_norm;
  return total;
}

SelfRepModel make_model(std::size_t patch_dim, std::size_t n, const ModelConfig& config, const LossWeights& weights,
                        std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::TooFewPatches, "need at least 2 patches");
  std::vector<std::size_t> enc_dims{patch_dim};
  for (std::size_t h : config.hidden) enc_dims.push_back(h);
  enc_dims.push_back(config.latent_dim);
  const std::vector<std::size_t> dec_dims(enc_dims.rbegin(), enc_dims.rend());
  SelfRepModel model;
  model.encoder = init_network(enc_dims, config.grid, derive_seed(seed, 11));
  model.decoder = init_network(dec_dims, config.grid, derive_seed(seed, 12));
  model.theta_s = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  model.weights = weights;
  return model;
}

Matrix encode(const SelfRepModel& model, const Matrix& p, Backend backend) {
  return network_forward(model.encoder, p, nullptr, backend);
}

LossEvaluation evaluate_loss(const Matrix& p, const SelfRepModel& model, double eps_norm, bool with_gradient,
                             Backend backend, const Matrix* frozen_latent) {
  require_dims(static_cast<std::size_t>(p.rows()) == model.n(),
               "P has " + std::to_string(p.rows()) + " rows, model expects n = " + std::to_string(model.n()));
  const LossWeights& lw = model.weights;
  const Matrix& theta = model.theta_s;
  const Matrix r = difference_matrix(model.n());

  LossEvaluation out;
  ForwardCache enc_cache, dec_cache;
  if (frozen_latent) {
    require_dims(frozen_latent->rows() == p.rows() && static_cast<std::size_t>(frozen_latent->cols()) == model.latent_dim(),
                 "frozen latent must be n x latent_dim");
    out.latent = *frozen_latent;
  } else {
    out.latent = network_forward(model.encoder, p, &enc_cache, backend);
  }
  const Matrix& z = out.latent;
  const Matrix z_hat = theta.transpose() * z;
  out.reconstruction = network_forward(model.decoder, z_hat, &dec_cache, backend);

  const Matrix residual = z - z_hat;
  const Matrix diff = theta * r;
  LossComponents& c = out.loss;
  c.reconstruction = reconstruction_loss(p, out.reconstruction);
  c.sparsity = sparsity_penalty(theta, eps_norm);
  c.selfrep = residual.squaredNorm();
  c.smoothness = smoothness_penalty(theta, r, eps_norm);
  c.total = c.reconstruction + lw.sparsity * c.sparsity + lw.selfrep * c.selfrep + lw.smoothness * c.smoothness;
  if (!with_gradient) return out;

  ModelGradient& g = out.grad;
  // Decoder path: P_hat = dec(theta^T Z).
  const Matrix d_out = out.reconstruction - p;
  g.decoder = network_backward(model.decoder, dec_cache, d_out, backend);
  const Matrix& d_zhat = g.decoder.input;
  Matrix d_z = theta * d_zhat;
  Matrix d_theta = z * d_zhat.transpose();

  // lambda2 ||Z - theta^T Z||^2
  const Matrix d_res = (2.0 * lw.selfrep) * residual;
  d_z += d_res - theta * d_res;
  d_theta -= z * d_res.transpose();

  // lambda1 sum sqrt(theta^2 + eps^2)
  const double eps2 = eps_norm * eps_norm;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double v = theta.data()[i];
    d_theta.data()[i] += lw.sparsity * v / std::sqrt(v * v + eps2);
  }

  // lambda3 sum_j sqrt(||theta_{j+1} - theta_j||^2 + eps^2); gradient is dM R^T.
  Matrix d_diff(diff.rows(), diff.cols());
  for (Eigen::Index j = 0; j < diff.cols(); ++j)
    d_diff.col(j) = lw.smoothness * diff.col(j) / std::sqrt(diff.col(j).squaredNorm() + eps2);
  d_theta += d_diff * r.transpose();

  g.encoder = frozen_latent ? zero_gradient(model.encoder)
                            : network_backward(model.encoder, enc_cache, d_z, backend, false);
  g.theta_s = std::move(d_theta);
  return out;
}

LossComponents total_loss(const Matrix& p, const SelfRepModel& model, double eps_norm) {
  return evaluate_loss(p, model, eps_norm, false).loss;
}

LossEvaluation evaluate_autoencoder(const Matrix& p, const SelfRepModel& model, bool with_gradient,
                                    Backend backend) {
  LossEvaluation out;
  ForwardCache enc_cache, dec_cache;
  out.latent = network_forward(model.encoder, p, &enc_cache, backend);
  out.reconstruction = network_forward(model.decoder, out.latent, &dec_cache, backend);
  out.loss.reconstruction = reconstruction_loss(p, out.reconstruction);
  out.loss.total = out.loss.reconstruction;
  if (!with_gradient) return out;
  out.grad.decoder = network_backward(model.decoder, dec_cache, out.reconstruction - p, backend);
  out.grad.encoder = network_backward(model.encoder, enc_cache, out.grad.decoder.input, backend, false);
  out.grad.theta_s = Matrix::Zero(model.theta_s.rows(), model.theta_s.cols());
  return out;
}

}  // namespace driftkan
