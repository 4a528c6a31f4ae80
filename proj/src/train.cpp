#include <chrono>
#include <cmath>
#include <string>

#include "driftkan/error.hpp"
#include "driftkan/selfrep.hpp"

namespace driftkan {

namespace {

class Adam {
 public:
  Adam(double lr, double theta_lr, double beta1, double beta2, double eps)
      : lr_(lr), theta_lr_(theta_lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // With `theta_only`, the network blocks keep their moments and values. Bias
  // correction counts steps per block, so a block that starts late is not penalised.
  void step(SelfRepModel& model, ModelGradient& grad, bool theta_only = false) {
    std::size_t block = 0;
    const std::size_t blocks = 3 * (model.encoder.layers.size() + model.decoder.layers.size()) + 1;
    for_each_block(model, grad, [&](std::span<double> param, std::span<const double> g) {
      if (block == m_.size()) {
        m_.emplace_back(param.size(), 0.0);
        v_.emplace_back(param.size(), 0.0);
        t_.push_back(0);
      }
      if (theta_only && block + 1 < blocks) {
        ++block;
        return;
      }
      const double t = static_cast<double>(++t_[block]);
      const double c1 = 1.0 - std::pow(beta1_, t);
      const double c2 = 1.0 - std::pow(beta2_, t);
      const double lr = block + 1 == blocks ? theta_lr_ : lr_;
      auto& m = m_[block];
      auto& v = v_[block];
      for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
        v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
        param[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
      }
      ++block;
    });
  }

 private:
  double lr_, theta_lr_, beta1_, beta2_, eps_;
  std::vector<std::size_t> t_;
  std::vector<std::vector<double>> m_, v_;
};

double gradient_norm(SelfRepModel& model, ModelGradient& grad) {
  double sq = 0.0;
  for_each_block(model, grad, [&](std::span<double>, std::span<const double> g) {
    for (double x : g) sq += x * x;
  });
  return std::sqrt(sq);
}

void check_finite(const LossComponents& loss, std::size_t epoch) {
  if (!std::isfinite(loss.total))
    throw Error(ErrorCode::NonFiniteLoss, "loss became non-finite at epoch " + std::to_string(epoch),
                static_cast<std::int64_t>(epoch));
}

}  // namespace

void validate(const TrainConfig& config) {
  if (config.epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
  if (!(config.learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning_rate must be > 0");
  if (!(config.theta_learning_rate >= 0.0))
    throw Error(ErrorCode::InvalidConfig, "theta_learning_rate must be >= 0");
  if (!(config.eps_norm > 0.0)) throw Error(ErrorCode::InvalidConfig, "eps_norm must be > 0");
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0 && config.beta2 >= 0.0 && config.beta2 < 1.0))
    throw Error(ErrorCode::InvalidConfig, "adam betas must lie in [0, 1)");
  const auto& w = config.weights;
  if (!(w.sparsity >= 0.0 && w.selfrep >= 0.0 && w.smoothness >= 0.0))
    throw Error(ErrorCode::InvalidConfig, "loss weights must be nonnegative");
}

std::pair<SelfRepModel, TrainReport> train(const PatchSet& patches, const TrainConfig& config,
                                           const ModelConfig& model_config, Backend backend) {
  validate(config);
  if (patches.n < 4) throw Error(ErrorCode::TooFewPatches, "training needs n >= 4, got " + std::to_string(patches.n));
  if (patches.dim < 1) throw Error(ErrorCode::InvalidDims, "patch dimension must be >= 1");

  const auto start = std::chrono::steady_clock::now();
  const Matrix& p = patches.data;
  const double theta_lr = config.theta_learning_rate > 0.0 ? config.theta_learning_rate : config.learning_rate;
  SelfRepModel model = make_model(patches.dim, patches.n, model_config, config.weights, config.seed);
  TrainReport report;

  if (config.pretrain_epochs > 0) {
    Adam pre(config.learning_rate, theta_lr, config.beta1, config.beta2, config.adam_eps);
    for (std::size_t epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
      LossEvaluation eval = evaluate_autoencoder(p, model, true, backend);
      check_finite(eval.loss, epoch);
      pre.step(model, eval.grad);
    }
  }

  Adam adam(config.learning_rate, theta_lr, config.beta1, config.beta2, config.adam_eps);
  const std::size_t total = config.theta_epochs + config.epochs;
  Matrix frozen;
  double previous = 0.0;
  std::size_t stalled = 0;
  for (std::size_t epoch = 0; epoch < total; ++epoch) {
    const bool theta_stage = epoch < config.theta_epochs;
    if (theta_stage && frozen.size() == 0) frozen = encode(model, p, backend);
    LossEvaluation eval = evaluate_loss(p, model, config.eps_norm, true, backend, theta_stage ? &frozen : nullptr);
    check_finite(eval.loss, epoch);
    report.trace.push_back(eval.loss);
    report.final_grad_norm = gradient_norm(model, eval.grad);
    adam.step(model, eval.grad, theta_stage);
    model.theta_s.diagonal().setZero();

    if (epoch > 0 && epoch != config.theta_epochs) {
      const double improvement = (previous - eval.loss.total) / std::max(std::abs(previous), 1e-300);
      stalled = improvement < config.tolerance ? stalled + 1 : 0;
    }
    previous = eval.loss.total;
    if (config.patience > 0 && stalled >= config.patience) {
      stalled = 0;
      if (!theta_stage) {
        report.converged = true;
        break;
      }
      epoch = config.theta_epochs - 1;  // theta stage has settled; move on to joint training
    }
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), std::move(report)};
}

}  // namespace driftkan
