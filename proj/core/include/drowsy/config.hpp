#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "drowsy/clahe.hpp"
#include "drowsy/dataset.hpp"
#include "drowsy/evaluation.hpp"
#include "drowsy/training.hpp"

namespace drowsy {

enum class FeaturizerKind { Precomputed, PatchStats };

/// Everything one pipeline run needs. Loaded from YAML; the schema is
/// documented in README.md and in configs/synthetic.yaml.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";

  /// Feature manifest (`video_id subject_id feature_file`), used with the
  /// precomputed featurizer.
  std::filesystem::path manifest;
  /// Frames manifest (`video_id subject_id frames_dir`), used with patch_stats.
  std::filesystem::path frames_manifest;

  FeaturizerKind featurizer = FeaturizerKind::Precomputed;
  int patch_grid = 4;
  std::optional<ClaheConfig> clahe;  // nullopt = enhancement off

  SplitFractions split;
  WindowSpec window;
  std::vector<Rate> normal_rates{Rate{1, 2}, Rate{2, 3}, Rate{1, 1}};
  std::vector<Rate> anomaly_rates{Rate{1, 2}, Rate{2, 3}, Rate{1, 1}};

  TrainConfig train;  // train.seed is ignored; stage seeds derive from `seed`
  ThresholdMode threshold_mode = ThresholdMode::Validation;
  std::size_t histogram_bins = 20;

  /// Throws ConfigError on invalid values or missing input paths.
  void validate() const;
};

/// Parses YAML. Relative paths are resolved against `base_dir`.
ExperimentConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace drowsy
