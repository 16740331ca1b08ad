#pragma once

#include <array>
#include <cstdint>

#include "drowsy/image.hpp"

namespace drowsy {

inline constexpr int kHistogramBins = 256;

using Histogram256 = std::array<std::int64_t, kHistogramBins>;
using Lut256 = std::array<std::uint8_t, kHistogramBins>;

struct ClaheConfig {
  /// Bin clip height in multiples of the uniform bin height (pixels / 256).
  double clip_limit = 5.0;
  /// Tiles per axis.
  int grid = 8;
};

/// Contrast-limited adaptive histogram equalization.
///
/// The image is split into grid x grid tiles (remainder pixels go to the last
/// tile on each axis). Each tile histogram is clipped at
/// max(1, floor(clip_limit * tile_pixels / 256)); the clipped excess is spread
/// evenly over all 256 bins and the integer-division residual is added one
/// count per bin from bin 0 upward. Tile lookup tables map v to
/// round_half_up(255 * cdf(v) / tile_pixels). Output pixels blend the lookup
/// tables of the nearest tile centers bilinearly; pixels outside the outer
/// ring of centers are clamped to the nearest 1 or 2 tiles.
///
/// Throws ErrorKind::GridTooFine when a tile would be empty and
/// ErrorKind::ConfigError for a non-positive clip limit or grid.
GrayImage clahe_enhance(const GrayImage& img, const ClaheConfig& cfg);

/// Plain global equalization: round_half_up(255 * cdf(v) / pixels).
GrayImage global_hist_equalize(const GrayImage& img);

// Building blocks, exposed for testing.
Histogram256 tile_histogram(const GrayImage& img, TileSpan cols, TileSpan rows);
Histogram256 clip_histogram(const Histogram256& hist, double clip_limit);
Lut256 equalization_lut(const Histogram256& hist);

}  // namespace drowsy
