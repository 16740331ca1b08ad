#include "drowsy/training.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "drowsy/error.hpp"
#include "drowsy/rng.hpp"

namespace drowsy {

void TrainConfig::validate() const {
  if (hidden_size < 1) throw Error(ErrorKind::ConfigError, "hidden size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorKind::ConfigError, "learning rate must be finite and >= 0");
  }
  if (batch_size < 1) throw Error(ErrorKind::ConfigError, "batch size must be >= 1");
  if (!(grad_clip >= 0.0)) throw Error(ErrorKind::ConfigError, "grad clip must be >= 0");
}

AutoencoderParams init_params(Eigen::Index feature_dim, Eigen::Index hidden_size,
                              std::uint64_t seed) {
  AutoencoderParams p = AutoencoderParams::zeros(feature_dim, hidden_size);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  Rng rng(derive_seed(seed, "init"));
  p.for_each_tensor([&](std::string_view, Eigen::Map<Eigen::MatrixXd> m) {
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.uniform(-bound, bound);
  });
  return p;
}

double batch_gradient(const ClipBatch& batch, const AutoencoderParams& params,
                      AutoencoderParams& grad_out) {
  grad_out = AutoencoderParams::zeros(params.feature_dim(), params.hidden_size());
  double loss = 0.0;
  for (const FeatureSequence* clip : batch) {
    LossAndGradient lg = backward(*clip, params);
    loss += lg.loss;
    std::vector<Eigen::Map<const Eigen::MatrixXd>> parts;
    std::as_const(lg.grad).for_each_tensor([&](std::string_view, Eigen::Map<const Eigen::MatrixXd> m) {
      parts.push_back(m);
    });
    std::size_t k = 0;
    grad_out.for_each_tensor([&](std::string_view, Eigen::Map<Eigen::MatrixXd> m) { m += parts[k++]; });
  }
  if (!batch.empty()) {
    const double scale = 1.0 / static_cast<double>(batch.size());
    grad_out.for_each_tensor([scale](std::string_view, Eigen::Map<Eigen::MatrixXd> m) { m *= scale; });
  }
  return loss;
}

void sgd_step(AutoencoderParams& params, const AutoencoderParams& grad, double learning_rate,
              double grad_clip) {
  double step = learning_rate;
  if (grad_clip > 0.0) {
    double sq = 0.0;
    grad.for_each_tensor([&sq](std::string_view, Eigen::Map<const Eigen::MatrixXd> m) { sq += m.squaredNorm(); });
    const double norm = std::sqrt(sq);
    if (norm > grad_clip) step *= grad_clip / norm;
  }
  std::vector<Eigen::Map<const Eigen::MatrixXd>> parts;
  grad.for_each_tensor([&](std::string_view, Eigen::Map<const Eigen::MatrixXd> m) { parts.push_back(m); });
  std::size_t k = 0;
  params.for_each_tensor([&](std::string_view, Eigen::Map<Eigen::MatrixXd> m) { m -= step * parts[k++]; });
}

double mean_clip_loss(std::span<const FeatureSequence* const> clips, const AutoencoderParams& params) {
  if (clips.empty()) return 0.0;
  double total = 0.0;
  for (const FeatureSequence* clip : clips) total += clip_loss(*clip, reconstruct(*clip, params));
  return total / static_cast<double>(clips.size());
}

TrainResult train(const BatchSource& batches, Eigen::Index feature_dim, const TrainConfig& cfg,
                  std::span<const FeatureSequence* const> validation) {
  cfg.validate();
  TrainResult result;
  result.params = init_params(feature_dim, cfg.hidden_size, cfg.seed);
  const bool early_stopping = cfg.patience > 0 && !validation.empty();
  AutoencoderParams best = result.params;
  double best_val = 0.0;
  std::size_t since_best = 0;
  AutoencoderParams grad;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<ClipBatch> epoch_batches = batches(epoch);
    double loss_sum = 0.0;
    std::size_t clip_count = 0;
    for (const ClipBatch& batch : epoch_batches) {
      if (batch.empty()) continue;
      loss_sum += batch_gradient(batch, result.params, grad);
      clip_count += batch.size();
      sgd_step(result.params, grad, cfg.learning_rate, cfg.grad_clip);
    }
    if (clip_count == 0) {
      throw Error(ErrorKind::NoNormalClips, "epoch " + std::to_string(epoch + 1) + " had no clips");
    }
    const double epoch_loss = loss_sum / static_cast<double>(clip_count);
    result.epoch_loss.push_back(epoch_loss);
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorKind::DivergenceDetected,
                  "epoch " + std::to_string(epoch + 1) + " loss is not finite");
    }
    result.best_epoch = epoch + 1;

    if (!validation.empty()) {
      const double val = mean_clip_loss(validation, result.params);
      result.val_loss.push_back(val);
      if (early_stopping) {
        if (epoch == 0 || val < best_val) {
          best_val = val;
          best = result.params;
          since_best = 0;
        } else if (++since_best >= cfg.patience) {
          result.stopped_early = true;
          break;
        }
      }
    }
  }
  if (early_stopping) {
    result.params = std::move(best);
    std::size_t best_index = 0;
    for (std::size_t e = 1; e < result.val_loss.size(); ++e) {
      if (result.val_loss[e] < result.val_loss[best_index]) best_index = e;
    }
    result.best_epoch = result.val_loss.empty() ? 0 : best_index + 1;
  }
  return result;
}

TrainResult train(std::span<const FeatureSequence> clips, const TrainConfig& cfg) {
  if (clips.empty()) throw Error(ErrorKind::NoNormalClips, "no training clips");
  std::vector<const FeatureSequence*> pointers;
  for (const auto& c : clips) pointers.push_back(&c);
  const std::uint64_t shuffle_seed = derive_seed(cfg.seed, "shuffle");
  const std::size_t batch_size = cfg.batch_size;
  BatchSource source = [pointers, shuffle_seed, batch_size](std::size_t epoch) {
    std::vector<const FeatureSequence*> order = pointers;
    Rng rng(derive_seed(shuffle_seed, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(std::span<const FeatureSequence*>(order));
    std::vector<ClipBatch> out;
    for (std::size_t i = 0; i < order.size(); i += batch_size) {
      const std::size_t end = std::min(order.size(), i + batch_size);
      out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                       order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
  };
  return train(source, clips.front().cols(), cfg);
}

}  // namespace drowsy
