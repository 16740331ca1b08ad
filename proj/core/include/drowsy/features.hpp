#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "drowsy/image.hpp"

namespace drowsy {

/// One per-frame feature vector (length D).
using FeatureVec = Eigen::VectorXd;

/// N x D matrix, one L2-normalized feature vector per row (row t = frame t).
using FeatureSequence = Eigen::MatrixXd;

inline constexpr std::size_t kDefaultFeatureDim = 512;

/// A mini-batch of clips, borrowed from the owning dataset.
using ClipBatch = std::vector<const FeatureSequence*>;

/// v / ||v||_2. Throws ErrorKind::ZeroVector when ||v||_2 < 1e-12 or v is empty,
/// and ErrorKind::DimensionMismatch when any entry is non-finite.
FeatureVec l2_normalize(const Eigen::Ref<const Eigen::VectorXd>& v);

/// Maps a frame to a raw (pre-normalization) feature vector. Implementations
/// must be deterministic and safe to call concurrently.
class Featurizer {
 public:
  virtual ~Featurizer() = default;
  virtual std::size_t dim() const = 0;
  virtual FeatureVec operator()(const GrayImage& img) const = 0;
};

/// Per-tile [mean, population std] of intensities scaled to [0,1] on a
/// grid x grid partition (remainder pixels go to the last tile per axis).
/// Output dimension is 2 * grid^2, not normalized.
class PatchStatsFeaturizer final : public Featurizer {
 public:
  explicit PatchStatsFeaturizer(int grid);

  int grid() const noexcept { return grid_; }
  std::size_t dim() const override;
  FeatureVec operator()(const GrayImage& img) const override;

 private:
  int grid_;
};

/// PatchStatsFeaturizer followed by l2_normalize.
FeatureVec patch_stats_featurize(const GrayImage& img, int grid);

/// Row t = l2_normalize(featurizer(frames[t])). Frames must share dimensions.
FeatureSequence featurize_sequence(std::span<const GrayImage> frames,
                                   const Featurizer& featurizer);

}  // namespace drowsy
