#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drowsy/feature_file.hpp"
#include "drowsy/features.hpp"

namespace drowsy {

// ---------------------------------------------------------------------------
// Windowing

struct WindowSpec {
  int clip_len = 48;     // sampled frames per clip
  int sample_rate = 2;   // take every k-th raw frame
  int stride = 23;       // raw frames between consecutive window starts

  /// Raw frames covered by one window: (clip_len - 1) * sample_rate + 1.
  std::size_t span() const;
  void validate() const;
};

/// Window start indices {0, stride, 2*stride, ...} whose windows fit inside
/// n_frames raw frames. Empty when the video is shorter than one span.
std::vector<std::size_t> window_video(std::size_t n_frames, const WindowSpec& spec);

// ---------------------------------------------------------------------------
// Confidence rates and clip labels

/// Exact rational rate in (0, 1]. Comparisons against frame counts are done in
/// integer arithmetic so 2/3 means exactly two thirds.
class Rate {
 public:
  constexpr Rate() = default;
  Rate(std::int64_t numerator, std::int64_t denominator);

  /// Accepts "a/b", "1", or a decimal such as "0.5".
  static Rate parse(std::string_view text);

  std::int64_t numerator() const noexcept { return num_; }
  std::int64_t denominator() const noexcept { return den_; }
  double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

  /// count / total >= rate.
  bool met_by(std::int64_t count, std::int64_t total) const noexcept {
    return count * den_ >= num_ * total;
  }

  std::string to_string() const;

  friend bool operator==(const Rate& a, const Rate& b) noexcept {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator<(const Rate& a, const Rate& b) noexcept {
    return a.num_ * b.den_ < b.num_ * a.den_;
  }

 private:
  std::int64_t num_ = 1;
  std::int64_t den_ = 1;
};

struct RateConfig {
  Rate normal_rate{1, 2};
  Rate anomaly_rate{1, 2};
};

enum class ClipLabel { Normal, Anomalous, Unassigned };

std::string_view to_string(ClipLabel label) noexcept;

/// Anomalous if the anomalous fraction meets anomaly_rate (checked first, so
/// a clip meeting both rates is Anomalous); else Normal if the normal fraction
/// meets normal_rate; else Unassigned.
ClipLabel assign_clip_label(std::span<const std::uint8_t> frame_labels, const RateConfig& rates);

// ---------------------------------------------------------------------------
// Clips

struct Clip {
  std::string clip_id;   // "<video_id>@<start>"
  std::string video_id;
  std::size_t start = 0;
  std::vector<std::size_t> frame_indices;
  FrameLabels frame_labels;   // labels of the sampled frames only
  FeatureSequence features;   // clip_len x D
};

std::string make_clip_id(std::string_view video_id, std::size_t start);

/// All windows of one video, with sampled features and labels.
std::vector<Clip> make_clips(const VideoFeatures& video, const WindowSpec& spec);

// ---------------------------------------------------------------------------
// Manifest and subject splits

struct ManifestEntry {
  std::string video_id;
  std::string subject_id;
  std::filesystem::path feature_path;
};

/// One line per video: `video_id subject_id feature_file_path`. Relative paths
/// resolve against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

enum class Split { Train, Val, Test };

std::string_view to_string(Split split) noexcept;
Split parse_split(std::string_view text);

struct SplitFractions {
  double train = 0.5;
  double val = 0.25;
  double test = 0.25;
};

struct SplitAssignment {
  std::map<std::string, Split> by_video;

  Split of(const std::string& video_id) const;
  std::vector<std::string> videos(Split split) const;
};

/// Partition by subject: subjects are shuffled with `seed` and allotted to
/// splits in proportion to `fractions` (largest-remainder rounding). Throws
/// InsufficientSubjects if a split with a positive fraction would be empty.
SplitAssignment build_splits(std::span<const ManifestEntry> videos,
                             const SplitFractions& fractions, std::uint64_t seed);

/// `video_id split` lines, sorted by video id.
void write_split_file(const std::filesystem::path& path, const SplitAssignment& splits);
SplitAssignment read_split_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Training batches

/// Normal clips (under `rates`) shuffled by `seed` and chunked; the final
/// short batch is kept. Throws NoNormalClips if none qualify.
std::vector<ClipBatch> training_batches(std::span<const Clip> clips, const RateConfig& rates,
                                        std::size_t batch_size, std::uint64_t seed);

}  // namespace drowsy
