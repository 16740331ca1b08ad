#include "drowsy/features.hpp"

#include <cmath>
#include <string>

#include "drowsy/error.hpp"

namespace drowsy {

FeatureVec l2_normalize(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() == 0) throw Error(ErrorKind::ZeroVector, "empty feature vector");
  if (!v.allFinite()) {
    throw Error(ErrorKind::DimensionMismatch, "feature vector has non-finite entries");
  }
  const double norm = v.norm();
  if (norm < 1e-12) {
    throw Error(ErrorKind::ZeroVector, "feature vector norm below 1e-12");
  }
  return v / norm;
}

PatchStatsFeaturizer::PatchStatsFeaturizer(int grid) : grid_(grid) {
  if (grid < 1) throw Error(ErrorKind::ConfigError, "patch grid must be >= 1");
}

std::size_t PatchStatsFeaturizer::dim() const {
  return 2 * static_cast<std::size_t>(grid_) * static_cast<std::size_t>(grid_);
}

FeatureVec PatchStatsFeaturizer::operator()(const GrayImage& img) const {
  if (img.width() < grid_ || img.height() < grid_) {
    throw Error(ErrorKind::DimensionMismatch,
                "image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                    " smaller than patch grid " + std::to_string(grid_));
  }
  FeatureVec out(static_cast<Eigen::Index>(dim()));
  Eigen::Index k = 0;
  for (int ty = 0; ty < grid_; ++ty) {
    const TileSpan rows = tile_span(img.height(), grid_, ty);
    for (int tx = 0; tx < grid_; ++tx) {
      const TileSpan cols = tile_span(img.width(), grid_, tx);
      double sum = 0.0;
      for (int y = rows.begin; y < rows.end; ++y) {
        for (int x = cols.begin; x < cols.end; ++x) sum += img.at(x, y) / 255.0;
      }
      const double count = static_cast<double>(rows.size()) * cols.size();
      const double mean = sum / count;
      double sq = 0.0;
      for (int y = rows.begin; y < rows.end; ++y) {
        for (int x = cols.begin; x < cols.end; ++x) {
          const double d = img.at(x, y) / 255.0 - mean;
          sq += d * d;
        }
      }
      out[k++] = mean;
      out[k++] = std::sqrt(sq / count);
    }
  }
  return out;
}

FeatureVec patch_stats_featurize(const GrayImage& img, int grid) {
  return l2_normalize(PatchStatsFeaturizer(grid)(img));
}

FeatureSequence featurize_sequence(std::span<const GrayImage> frames,
                                   const Featurizer& featurizer) {
  if (frames.empty()) {
    throw Error(ErrorKind::DimensionMismatch, "featurize_sequence needs at least one frame");
  }
  const int width = frames.front().width();
  const int height = frames.front().height();
  FeatureSequence seq(static_cast<Eigen::Index>(frames.size()),
                      static_cast<Eigen::Index>(featurizer.dim()));
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].width() != width || frames[t].height() != height) {
      throw Error(ErrorKind::DimensionMismatch,
                  "frame " + std::to_string(t) + " differs in size from frame 0");
    }
    const FeatureVec raw = featurizer(frames[t]);
    if (static_cast<std::size_t>(raw.size()) != featurizer.dim()) {
      throw Error(ErrorKind::DimensionMismatch, "featurizer returned wrong dimension");
    }
    seq.row(static_cast<Eigen::Index>(t)) = l2_normalize(raw).transpose();
  }
  return seq;
}

}  // namespace drowsy
