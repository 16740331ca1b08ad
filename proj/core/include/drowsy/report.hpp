#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "drowsy/evaluation.hpp"

namespace drowsy {

// Scores file: one `clip_id score true_label` line per clip, score written
// with 17 significant digits.
void write_scores(const std::filesystem::path& path, std::span<const ScoredClip> scores);
std::vector<ScoredClip> read_scores(const std::filesystem::path& path);

/// Table with one block per metric (AUC, accuracy, recall, precision, F1 in
/// percent), anomaly rates as rows and normal rates as columns.
std::string format_grid_table(const RateGrid& grid);

/// One CSV row per grid cell.
std::string format_grid_csv(const RateGrid& grid);

/// Bin edges and per-class counts for every evaluated cell.
std::string format_histogram_csv(const RateGrid& grid);

/// Named metric values for one experiment, in display order.
struct MetricColumn {
  std::string label;
  std::vector<std::pair<std::string, double>> metrics;
};

/// AUC, accuracy, recall, precision and F1 of one cell of a grid CSV written
/// by format_grid_csv. Throws ParseError if the cell is missing or failed.
MetricColumn grid_cell_column(const std::filesystem::path& path, const std::string& label,
                              const Rate& normal_rate, const Rate& anomaly_rate);

/// Side-by-side table: one column per experiment, one row per metric name
/// (first-seen order); missing values print as "-".
std::string compare_table(std::span<const MetricColumn> columns, int precision = 4);

}  // namespace drowsy
