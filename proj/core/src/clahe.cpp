#include "drowsy/clahe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "drowsy/error.hpp"

namespace drowsy {

Histogram256 tile_histogram(const GrayImage& img, TileSpan cols, TileSpan rows) {
  Histogram256 hist{};
  for (int y = rows.begin; y < rows.end; ++y) {
    for (int x = cols.begin; x < cols.end; ++x) ++hist[img.at(x, y)];
  }
  return hist;
}

Histogram256 clip_histogram(const Histogram256& hist, double clip_limit) {
  const std::int64_t total = std::accumulate(hist.begin(), hist.end(), std::int64_t{0});
  const double raw_limit = clip_limit * static_cast<double>(total) / kHistogramBins;
  // Limits above the total can never clip; cap to avoid overflow on huge factors.
  const std::int64_t limit =
      raw_limit >= static_cast<double>(total)
          ? total
          : std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(raw_limit)));

  Histogram256 out = hist;
  std::int64_t excess = 0;
  for (auto& bin : out) {
    if (bin > limit) {
      excess += bin - limit;
      bin = limit;
    }
  }
  const std::int64_t per_bin = excess / kHistogramBins;
  const std::int64_t residual = excess % kHistogramBins;
  for (int b = 0; b < kHistogramBins; ++b) {
    out[b] += per_bin + (b < residual ? 1 : 0);
  }
  return out;
}

Lut256 equalization_lut(const Histogram256& hist) {
  const std::int64_t total = std::accumulate(hist.begin(), hist.end(), std::int64_t{0});
  Lut256 lut{};
  if (total == 0) return lut;
  std::int64_t cdf = 0;
  for (int b = 0; b < kHistogramBins; ++b) {
    cdf += hist[b];
    // round_half_up(255 * cdf / total) in exact integer arithmetic.
    lut[b] = static_cast<std::uint8_t>((510 * cdf + total) / (2 * total));
  }
  return lut;
}

GrayImage global_hist_equalize(const GrayImage& img) {
  const Lut256 lut = equalization_lut(
      tile_histogram(img, {0, img.width()}, {0, img.height()}));
  GrayImage out = img;
  for (auto& px : out.pixels()) px = lut[px];
  return out;
}

namespace {

// For one axis: the pair of tiles whose centers bracket each coordinate and
// the weight of the second one.
struct AxisBlend {
  std::vector<int> lo;
  std::vector<int> hi;
  std::vector<double> weight;
};

AxisBlend axis_blend(int extent, int tiles) {
  std::vector<double> centers(static_cast<std::size_t>(tiles));
  for (int t = 0; t < tiles; ++t) {
    const TileSpan span = tile_span(extent, tiles, t);
    centers[static_cast<std::size_t>(t)] = span.begin + (span.size() - 1) / 2.0;
  }
  AxisBlend blend;
  blend.lo.resize(static_cast<std::size_t>(extent));
  blend.hi.resize(static_cast<std::size_t>(extent));
  blend.weight.resize(static_cast<std::size_t>(extent));
  int t = 0;
  for (int p = 0; p < extent; ++p) {
    const auto i = static_cast<std::size_t>(p);
    if (p <= centers.front()) {
      blend.lo[i] = blend.hi[i] = 0;
      blend.weight[i] = 0.0;
    } else if (p >= centers.back()) {
      blend.lo[i] = blend.hi[i] = tiles - 1;
      blend.weight[i] = 0.0;
    } else {
      while (centers[static_cast<std::size_t>(t) + 1] <= p) ++t;
      const double c0 = centers[static_cast<std::size_t>(t)];
      const double c1 = centers[static_cast<std::size_t>(t) + 1];
      blend.lo[i] = t;
      blend.hi[i] = t + 1;
      blend.weight[i] = (p - c0) / (c1 - c0);
    }
  }
  return blend;
}

}  // namespace

GrayImage clahe_enhance(const GrayImage& img, const ClaheConfig& cfg) {
  if (!(cfg.clip_limit > 0.0) || !std::isfinite(cfg.clip_limit)) {
    throw Error(ErrorKind::ConfigError, "CLAHE clip limit must be positive and finite");
  }
  if (cfg.grid < 1) throw Error(ErrorKind::ConfigError, "CLAHE grid must be >= 1");
  if (img.width() < cfg.grid || img.height() < cfg.grid) {
    throw Error(ErrorKind::GridTooFine,
                "CLAHE grid " + std::to_string(cfg.grid) + " leaves empty tiles on a " +
                    std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                    " image");
  }

  const int g = cfg.grid;
  std::vector<Lut256> luts(static_cast<std::size_t>(g) * static_cast<std::size_t>(g));
  for (int ty = 0; ty < g; ++ty) {
    for (int tx = 0; tx < g; ++tx) {
      const Histogram256 hist = tile_histogram(img, tile_span(img.width(), g, tx),
                                               tile_span(img.height(), g, ty));
      luts[static_cast<std::size_t>(ty * g + tx)] =
          equalization_lut(clip_histogram(hist, cfg.clip_limit));
    }
  }
  const auto lut_at = [&](int tx, int ty, std::uint8_t v) -> double {
    return luts[static_cast<std::size_t>(ty * g + tx)][v];
  };

  const AxisBlend bx = axis_blend(img.width(), g);
  const AxisBlend by = axis_blend(img.height(), g);
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    const auto yi = static_cast<std::size_t>(y);
    const int y0 = by.lo[yi];
    const int y1 = by.hi[yi];
    const double wy = by.weight[yi];
    for (int x = 0; x < img.width(); ++x) {
      const auto xi = static_cast<std::size_t>(x);
      const int x0 = bx.lo[xi];
      const int x1 = bx.hi[xi];
      const double wx = bx.weight[xi];
      const std::uint8_t v = img.at(x, y);
      const double top = lut_at(x0, y0, v) + wx * (lut_at(x1, y0, v) - lut_at(x0, y0, v));
      const double bottom = lut_at(x0, y1, v) + wx * (lut_at(x1, y1, v) - lut_at(x0, y1, v));
      const double value = top + wy * (bottom - top);
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::floor(value + 0.5), 0.0, 255.0));
    }
  }
  return out;
}

}  // namespace drowsy
