#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "drowsy/clahe.hpp"
#include "drowsy/config.hpp"
#include "drowsy/dataset.hpp"
#include "drowsy/evaluation.hpp"
#include "drowsy/lstm.hpp"

namespace drowsy {

// Stage building blocks, shared by run_pipeline and the CLI subcommands.

/// Loads every manifest entry's features. The feature file must contain a
/// record whose id matches the entry's video id.
std::vector<VideoFeatures> load_videos(std::span<const ManifestEntry> entries);

/// Optional CLAHE, then patch-stats features for one folder of frames.
VideoFeatures featurize_frames(const std::string& video_id, std::span<const GrayImage> frames,
                               const FrameLabels& labels, const std::optional<ClaheConfig>& clahe,
                               int patch_grid);

/// Clips of every video, in manifest order.
std::vector<Clip> window_videos(std::span<const VideoFeatures> videos, const WindowSpec& spec);

/// Clips whose video belongs to `split`.
std::vector<Clip> clips_in_split(std::span<const Clip> clips, const SplitAssignment& splits,
                                 Split split);

/// Anomaly score of every clip with its frame labels.
std::vector<LabeledScore> score_clips(std::span<const Clip> clips, const AutoencoderParams& params);

/// Scores with the majority clip label (rates 1/2, 1/2), for the scores file.
std::vector<ScoredClip> majority_labeled(std::span<const LabeledScore> scores);

// Clip index: `clip_id video_id start frame_labels` per line.
void write_clip_index(const std::filesystem::path& path, std::span<const Clip> clips);
std::map<std::string, FrameLabels> read_clip_index(const std::filesystem::path& path);

/// "1/2" -> "1-2", for file names.
std::string rate_tag(const Rate& rate);

struct PipelineResult {
  RateGrid grid;
  std::filesystem::path report_txt;
  std::filesystem::path report_csv;
  std::filesystem::path histogram_csv;
  /// Stages whose artifacts were reused from a previous run.
  std::vector<std::string> reused;
};

/// enhance -> featurize -> window -> split -> train (one model per normal
/// rate, Normal training clips only) -> score -> evaluate. Artifacts are
/// written to cfg.output_dir; featurization and trained models are cached
/// under content keys and reused when their inputs are unchanged. Errors are
/// re-thrown tagged with the failing stage.
PipelineResult run_pipeline(const ExperimentConfig& cfg, std::ostream* log = nullptr);

}  // namespace drowsy
