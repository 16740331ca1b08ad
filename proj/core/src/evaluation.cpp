#include "drowsy/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "drowsy/error.hpp"

namespace drowsy {

namespace {

struct ClassCounts {
  std::int64_t pos = 0;
  std::int64_t neg = 0;
};

ClassCounts count_classes(std::span<const ScoredClip> scored) {
  ClassCounts c;
  for (const auto& s : scored) {
    if (!std::isfinite(s.score)) {
      throw Error(ErrorKind::ParseError, "clip '" + s.clip_id + "' has a non-finite score");
    }
    (s.anomalous ? c.pos : c.neg) += 1;
  }
  return c;
}

ClassCounts require_both_classes(std::span<const ScoredClip> scored) {
  const ClassCounts c = count_classes(scored);
  if (c.pos == 0 || c.neg == 0) {
    throw Error(ErrorKind::SingleClassInput,
                "need both classes, got " + std::to_string(c.pos) + " anomalous and " +
                    std::to_string(c.neg) + " normal clips");
  }
  return c;
}

// Visits groups of equal score from the highest score down, passing the
// cumulative (tp, fp) after the group and the group's score.
template <class F>
void sweep_groups(std::span<const ScoredClip> scored, F&& visit) {
  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scored[a].score > scored[b].score; });
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::size_t k = 0;
  while (k < order.size()) {
    const double score = scored[order[k]].score;
    while (k < order.size() && scored[order[k]].score == score) {
      (scored[order[k]].anomalous ? tp : fp) += 1;
      ++k;
    }
    visit(tp, fp, score);
  }
}

double ratio(std::size_t num, std::size_t den, bool& undefined) {
  undefined = den == 0;
  return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::vector<RocPoint> roc_curve(std::span<const ScoredClip> scored) {
  const ClassCounts c = require_both_classes(scored);
  std::vector<RocPoint> roc;
  roc.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  sweep_groups(scored, [&](std::int64_t tp, std::int64_t fp, double score) {
    roc.push_back({static_cast<double>(fp) / static_cast<double>(c.neg),
                   static_cast<double>(tp) / static_cast<double>(c.pos), score});
  });
  return roc;
}

double auc(std::span<const RocPoint> roc) {
  double area = 0.0;
  for (std::size_t k = 1; k < roc.size(); ++k) {
    area += (roc[k].fpr - roc[k - 1].fpr) * (roc[k].tpr + roc[k - 1].tpr) / 2.0;
  }
  return area;
}

double select_threshold(std::span<const ScoredClip> scored) {
  const ClassCounts c = require_both_classes(scored);
  // J * P * N = tp * N - fp * P, compared exactly in integers.
  std::int64_t best_j = std::numeric_limits<std::int64_t>::min();
  double best_threshold = 0.0;
  sweep_groups(scored, [&](std::int64_t tp, std::int64_t fp, double score) {
    const std::int64_t j = tp * c.neg - fp * c.pos;
    if (j >= best_j) {
      best_j = j;
      best_threshold = score;
    }
  });
  return best_threshold;
}

ConfusionMetrics confusion_metrics(std::span<const ScoredClip> scored, double threshold) {
  ConfusionMetrics m;
  for (const auto& s : scored) {
    const bool predicted = s.score >= threshold;
    if (s.anomalous) {
      (predicted ? m.tp : m.fn) += 1;
    } else {
      (predicted ? m.fp : m.tn) += 1;
    }
  }
  bool unused = false;
  m.accuracy = ratio(m.tp + m.tn, scored.size(), unused);
  m.recall = ratio(m.tp, m.tp + m.fn, m.recall_undefined);
  m.precision = ratio(m.tp, m.tp + m.fp, m.precision_undefined);
  m.specificity = ratio(m.tn, m.tn + m.fp, m.specificity_undefined);
  const double denom = m.precision + m.recall;
  m.f1_undefined = denom == 0.0;
  m.f1 = m.f1_undefined ? 0.0 : 2.0 * m.precision * m.recall / denom;
  return m;
}

ScoreHistogram score_histogram(std::span<const ScoredClip> scored, std::size_t n_bins, double lo,
                               double hi) {
  if (n_bins < 1) throw Error(ErrorKind::ConfigError, "histogram needs at least one bin");
  if (hi < lo) std::swap(lo, hi);
  ScoreHistogram h;
  h.edges.resize(n_bins + 1);
  for (std::size_t k = 0; k <= n_bins; ++k) {
    h.edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n_bins);
  }
  h.counts[0].assign(n_bins, 0);
  h.counts[1].assign(n_bins, 0);
  const double width = hi - lo;
  for (const auto& s : scored) {
    std::size_t bin = 0;
    if (width > 0.0) {
      const double pos = (s.score - lo) / width * static_cast<double>(n_bins);
      if (pos >= static_cast<double>(n_bins)) {
        bin = n_bins - 1;
      } else if (pos > 0.0) {
        bin = static_cast<std::size_t>(pos);
      }
    }
    ++h.counts[s.anomalous ? 1 : 0][bin];
  }
  return h;
}

ScoreHistogram score_histogram(std::span<const ScoredClip> scored, std::size_t n_bins) {
  if (scored.empty()) return score_histogram(scored, n_bins, 0.0, 0.0);
  const auto [mn, mx] = std::minmax_element(
      scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.score < b.score; });
  return score_histogram(scored, n_bins, mn->score, mx->score);
}

EvalReport evaluate(std::span<const ScoredClip> scored, std::optional<double> threshold,
                    std::size_t histogram_bins) {
  EvalReport r;
  const ClassCounts c = require_both_classes(scored);
  r.n_anomalous = static_cast<std::size_t>(c.pos);
  r.n_normal = static_cast<std::size_t>(c.neg);
  r.roc = roc_curve(scored);
  r.auc = auc(r.roc);
  r.threshold = threshold ? *threshold : select_threshold(scored);
  r.metrics = confusion_metrics(scored, r.threshold);
  r.histogram = score_histogram(scored, histogram_bins);
  return r;
}

// ---------------------------------------------------------------------------

const GridCell& RateGrid::at(const Rate& normal_rate, const Rate& anomaly_rate) const {
  for (const auto& cell : cells) {
    if (cell.normal_rate == normal_rate && cell.anomaly_rate == anomaly_rate) return cell;
  }
  throw Error(ErrorKind::ConfigError, "no grid cell for rates (" + normal_rate.to_string() + ", " +
                                          anomaly_rate.to_string() + ")");
}

std::vector<ScoredClip> label_scores(std::span<const LabeledScore> scores, const RateConfig& rates,
                                     std::size_t* excluded) {
  std::vector<ScoredClip> out;
  std::size_t dropped = 0;
  for (const auto& s : scores) {
    const ClipLabel label = assign_clip_label(s.frame_labels, rates);
    if (label == ClipLabel::Unassigned) {
      ++dropped;
      continue;
    }
    out.push_back({s.clip_id, s.score, label == ClipLabel::Anomalous});
  }
  if (excluded) *excluded = dropped;
  return out;
}

RateGrid rate_grid_report(std::span<const ScoreColumn> columns, std::span<const Rate> anomaly_rates,
                          ThresholdMode mode, std::size_t histogram_bins) {
  RateGrid grid;
  for (const auto& col : columns) grid.normal_rates.push_back(col.normal_rate);
  grid.anomaly_rates.assign(anomaly_rates.begin(), anomaly_rates.end());
  for (const Rate& ar : anomaly_rates) {
    for (const auto& col : columns) {
      GridCell cell;
      cell.normal_rate = col.normal_rate;
      cell.anomaly_rate = ar;
      const RateConfig rates{col.normal_rate, ar};
      const std::vector<ScoredClip> test = label_scores(col.test, rates, &cell.n_excluded);
      cell.n_clips = test.size();
      try {
        std::optional<double> threshold;
        if (mode == ThresholdMode::Validation) {
          const std::vector<ScoredClip> val = label_scores(col.validation, rates);
          try {
            threshold = select_threshold(val);
          } catch (const Error& e) {
            throw e.with_stage("validation threshold");
          }
        }
        cell.report = evaluate(test, threshold, histogram_bins);
      } catch (const Error& e) {
        cell.error = e.what();
      }
      grid.cells.push_back(std::move(cell));
    }
  }
  return grid;
}

RateGrid rate_grid_report(std::span<const LabeledScore> test, std::span<const LabeledScore> validation,
                          std::span<const Rate> normal_rates, std::span<const Rate> anomaly_rates,
                          ThresholdMode mode, std::size_t histogram_bins) {
  std::vector<ScoreColumn> columns;
  for (const Rate& nr : normal_rates) {
    columns.push_back({nr, {test.begin(), test.end()}, {validation.begin(), validation.end()}});
  }
  return rate_grid_report(columns, anomaly_rates, mode, histogram_bins);
}

}  // namespace drowsy
