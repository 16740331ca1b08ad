#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "drowsy/dataset.hpp"
#include "drowsy/feature_file.hpp"
#include "drowsy/image.hpp"

namespace drowsy {

/// Desk-scale stand-in for a labeled driver video corpus.
///
/// Normal frames follow a smooth low-frequency trajectory around a shared
/// baseline plus small noise. Anomaly-bearing videos contain labeled segments
/// of two kinds, alternating: "jump" segments add a fresh random offset every
/// few frames, "freeze" segments hold a displaced state for a few frames and
/// then jump to another one.
struct SyntheticSpec {
  int normal_videos = 8;
  int anomaly_videos = 4;
  int subjects = 4;
  int frames_per_video = 300;
  int feature_dim = 8;
  double noise = 0.02;
  double drift_amplitude = 0.1;
  double anomaly_amplitude = 1.5;
  int segments_per_video = 2;
  int min_segment = 60;
  int max_segment = 110;
  /// Image mode: emit PGM frames instead of feature vectors.
  bool frames = false;
  int frame_size = 32;

  void validate() const;
};

struct SyntheticVideo {
  std::string subject_id;
  VideoFeatures video;  // features empty in image mode
  std::vector<GrayImage> frames;  // empty in feature mode
};

std::vector<SyntheticVideo> synthesize(const SyntheticSpec& spec, std::uint64_t seed);

struct FramesManifestEntry {
  std::string video_id;
  std::string subject_id;
  std::filesystem::path frames_dir;  // *.pgm frames + labels.txt
};

/// Writes the corpus under `out_dir`. Feature mode: `manifest.txt` plus one
/// feature file per video in `features/`. Image mode: `frames_manifest.txt`
/// plus `frames/<video_id>/frame_NNNNN.pgm` and `labels.txt`.
void generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed,
                        const std::filesystem::path& out_dir);

// Frames manifest: `video_id subject_id frames_dir` per line, relative
// directories resolved against the manifest's directory.
std::vector<FramesManifestEntry> read_frames_manifest(const std::filesystem::path& path);

/// Frames of a directory in lexicographic file-name order, plus the labels
/// from `labels.txt` in the same directory.
struct FrameFolder {
  std::vector<GrayImage> frames;
  FrameLabels labels;
};
FrameFolder read_frame_folder(const std::filesystem::path& dir);

}  // namespace drowsy
