#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "drowsy/features.hpp"
#include "drowsy/lstm.hpp"

namespace drowsy {

struct TrainConfig {
  Eigen::Index hidden_size = 128;
  double learning_rate = 0.01;
  std::size_t batch_size = 4;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  /// Global-norm clip for the batch gradient; 0 disables clipping.
  double grad_clip = 0.0;
  /// Early-stopping patience on validation loss; 0 disables early stopping.
  std::size_t patience = 0;

  void validate() const;
};

struct TrainResult {
  AutoencoderParams params;
  /// Mean clip loss over each epoch's training clips (measured before the
  /// update of the batch that contains them).
  std::vector<double> epoch_loss;
  /// Mean validation clip loss after each epoch (empty without validation).
  std::vector<double> val_loss;
  std::size_t best_epoch = 0;  // 1-based; last epoch when not early-stopping
  bool stopped_early = false;
};

/// Produces the batches for a given 0-based epoch.
using BatchSource = std::function<std::vector<ClipBatch>(std::size_t epoch)>;

/// Uniform(-1/sqrt(H), 1/sqrt(H)) for every parameter, drawn from `seed`.
AutoencoderParams init_params(Eigen::Index feature_dim, Eigen::Index hidden_size,
                              std::uint64_t seed);

/// Mean of per-clip gradients over a batch; returns the batch's summed loss.
double batch_gradient(const ClipBatch& batch, const AutoencoderParams& params,
                      AutoencoderParams& grad_out);

/// params -= lr * grad, with optional global-norm clipping of grad.
void sgd_step(AutoencoderParams& params, const AutoencoderParams& grad, double learning_rate,
              double grad_clip = 0.0);

/// Plain mini-batch SGD on clip_loss. Throws DivergenceDetected when an epoch
/// loss is not finite. With validation clips and patience > 0, stops after
/// `patience` epochs without improvement and returns the best parameters.
TrainResult train(const BatchSource& batches, Eigen::Index feature_dim, const TrainConfig& cfg,
                  std::span<const FeatureSequence* const> validation = {});

/// Convenience overload: trains on every clip in `clips`, reshuffled each
/// epoch from cfg.seed.
TrainResult train(std::span<const FeatureSequence> clips, const TrainConfig& cfg);

/// Mean clip_loss over a set of clips.
double mean_clip_loss(std::span<const FeatureSequence* const> clips, const AutoencoderParams& params);

}  // namespace drowsy
