#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drowsy/dataset.hpp"

namespace drowsy {

struct ScoredClip {
  std::string clip_id;
  double score = 0.0;
  bool anomalous = false;  // true label: 1 = anomalous, 0 = normal
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  /// Score threshold producing this point (predict anomalous iff score >=
  /// threshold); +inf for the (0,0) endpoint.
  double threshold = 0.0;
};

/// Sweeps thresholds over the distinct scores from high to low. Clips sharing
/// a score enter together. Includes (0,0) and ends at (1,1).
/// Throws SingleClassInput unless both classes are present.
std::vector<RocPoint> roc_curve(std::span<const ScoredClip> scored);

/// Trapezoidal area under the curve.
double auc(std::span<const RocPoint> roc);

/// Threshold maximizing Youden's J = tpr - fpr over the distinct scores; ties
/// go to the lowest threshold.
double select_threshold(std::span<const ScoredClip> scored);

struct ConfusionMetrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  double specificity = 0.0;
  // Set when the metric's denominator was zero and it was reported as 0.
  bool recall_undefined = false;
  bool precision_undefined = false;
  bool f1_undefined = false;
  bool specificity_undefined = false;
};

/// Predict anomalous iff score >= threshold.
ConfusionMetrics confusion_metrics(std::span<const ScoredClip> scored, double threshold);

struct ScoreHistogram {
  std::vector<double> edges;                       // n_bins + 1
  std::array<std::vector<std::size_t>, 2> counts;  // [normal, anomalous]
};

/// Equal-width bins over [lo, hi]; out-of-range scores land in the end bins.
/// With lo == hi everything falls into bin 0.
ScoreHistogram score_histogram(std::span<const ScoredClip> scored, std::size_t n_bins, double lo,
                               double hi);
/// Range taken from the data's min and max score.
ScoreHistogram score_histogram(std::span<const ScoredClip> scored, std::size_t n_bins);

struct EvalReport {
  std::vector<RocPoint> roc;
  double auc = 0.0;
  double threshold = 0.0;
  ConfusionMetrics metrics;
  ScoreHistogram histogram;
  std::size_t n_normal = 0;
  std::size_t n_anomalous = 0;
};

/// Full report on `scored`. The threshold is selected on `scored` itself
/// unless one is given.
EvalReport evaluate(std::span<const ScoredClip> scored, std::optional<double> threshold = std::nullopt,
                    std::size_t histogram_bins = 20);

// ---------------------------------------------------------------------------
// Confidence-rate grid

/// A scored clip that still carries its sampled frame labels, so the clip
/// label can be re-derived under any rate pair.
struct LabeledScore {
  std::string clip_id;
  double score = 0.0;
  FrameLabels frame_labels;
};

/// Scores produced by the model trained at `normal_rate`.
struct ScoreColumn {
  Rate normal_rate;
  std::vector<LabeledScore> test;
  std::vector<LabeledScore> validation;  // used when thresholding on validation
};

enum class ThresholdMode { Validation, Test };

struct GridCell {
  Rate normal_rate;
  Rate anomaly_rate;
  std::size_t n_clips = 0;     // assigned (evaluated) test clips
  std::size_t n_excluded = 0;  // Unassigned test clips
  std::optional<EvalReport> report;
  std::string error;           // set when the cell could not be evaluated
};

struct RateGrid {
  std::vector<Rate> normal_rates;   // columns
  std::vector<Rate> anomaly_rates;  // rows
  std::vector<GridCell> cells;      // row-major: anomaly rate, then normal rate

  const GridCell& at(const Rate& normal_rate, const Rate& anomaly_rate) const;
};

/// Clip labels for a rate pair; Unassigned clips are dropped.
std::vector<ScoredClip> label_scores(std::span<const LabeledScore> scores, const RateConfig& rates,
                                     std::size_t* excluded = nullptr);

/// One cell per (column normal rate, anomaly rate). Each cell relabels and
/// filters the column's test clips under that pair and evaluates them, with
/// the threshold chosen on the equally filtered validation clips (or on the
/// test clips in ThresholdMode::Test). Per-cell failures such as
/// SingleClassInput are recorded in GridCell::error.
RateGrid rate_grid_report(std::span<const ScoreColumn> columns, std::span<const Rate> anomaly_rates,
                          ThresholdMode mode, std::size_t histogram_bins = 20);

/// Single score set evaluated under every normal rate.
RateGrid rate_grid_report(std::span<const LabeledScore> test, std::span<const LabeledScore> validation,
                          std::span<const Rate> normal_rates, std::span<const Rate> anomaly_rates,
                          ThresholdMode mode, std::size_t histogram_bins = 20);

}  // namespace drowsy
