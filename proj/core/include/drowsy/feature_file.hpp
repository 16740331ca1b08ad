#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "drowsy/features.hpp"

namespace drowsy {

/// Per-frame binary labels, 1 = drowsy/anomalous.
using FrameLabels = std::vector<std::uint8_t>;

struct VideoFeatures {
  std::string video_id;
  FeatureSequence features;  // N x D
  FrameLabels labels;        // length N
  std::size_t renormalized_rows = 0;  // set by the loader
};

// Text format, one or more records per file:
//   video_id N D
//   N lines of D space-separated reals (17 significant digits on write)
//   one line of N characters from {0,1}
//
// Rows whose norm is not within 1e-6 of 1 are re-normalized on load and a
// warning is written to stderr.
std::vector<VideoFeatures> load_feature_file(const std::filesystem::path& path);
std::vector<VideoFeatures> parse_feature_text(std::string_view text,
                                              const std::string& source = "<memory>");

void write_feature_file(const std::filesystem::path& path,
                        const std::vector<VideoFeatures>& videos);
std::string format_feature_text(const std::vector<VideoFeatures>& videos);

std::string labels_to_string(const FrameLabels& labels);
FrameLabels labels_from_string(std::string_view text);

/// Exact round-trip decimal rendering of a double (scientific, 17 digits).
std::string format_real(double value);
/// Strict parse of a full token as double; throws ParseError.
double parse_real(std::string_view token);

}  // namespace drowsy
