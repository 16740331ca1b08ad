#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "drowsy/error.hpp"
#include "drowsy/evaluation.hpp"
#include "support.hpp"

using namespace drowsy;
using testing_support::mann_whitney_auc;

namespace {

std::vector<ScoredClip> scored(std::initializer_list<double> scores, std::initializer_list<int> labels) {
  std::vector<ScoredClip> out;
  auto l = labels.begin();
  int i = 0;
  for (double s : scores) out.push_back({"c" + std::to_string(i++), s, *l++ != 0});
  return out;
}

std::vector<ScoredClip> random_scored(std::mt19937_64& gen, std::size_t n) {
  std::vector<ScoredClip> out;
  std::uniform_int_distribution<int> coarse(0, 9);
  for (std::size_t i = 0; i < n; ++i) {
    // Coarse grid of values so that ties are frequent.
    out.push_back({"c" + std::to_string(i), coarse(gen) / 10.0, gen() % 2 == 0});
  }
  out[0].anomalous = true;
  out[1].anomalous = false;
  return out;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::IoError;
}

LabeledScore ls(const std::string& id, double score, int zeros, int ones) {
  FrameLabels l(static_cast<std::size_t>(zeros), 0);
  l.insert(l.end(), static_cast<std::size_t>(ones), 1);
  return {id, score, l};
}

}  // namespace

TEST(Roc, PerfectSeparation) {
  const auto roc = roc_curve(scored({0.1, 0.9}, {0, 1}));
  ASSERT_EQ(roc.size(), 3u);
  EXPECT_EQ(roc[0].fpr, 0.0);
  EXPECT_EQ(roc[0].tpr, 0.0);
  EXPECT_EQ(roc[1].fpr, 0.0);
  EXPECT_EQ(roc[1].tpr, 1.0);
  EXPECT_EQ(roc[2].fpr, 1.0);
  EXPECT_EQ(roc[2].tpr, 1.0);
}

TEST(Roc, AllTiedIsOneJump) {
  const auto roc = roc_curve(scored({0.3, 0.3, 0.3, 0.3}, {0, 1, 1, 0}));
  ASSERT_EQ(roc.size(), 2u);
  EXPECT_EQ(roc[1].fpr, 1.0);
  EXPECT_EQ(roc[1].tpr, 1.0);
  EXPECT_EQ(auc(roc), 0.5);
}

TEST(Roc, StaircaseMatchesThresholdEnumeration) {
  const auto s = scored({0.4, 0.45, 0.5, 0.6}, {0, 1, 0, 1});
  const auto roc = roc_curve(s);
  // thresholds 0.6, 0.5, 0.45, 0.4 -> (fpr, tpr)
  const std::vector<std::pair<double, double>> expected{{0, 0}, {0, 0.5}, {0.5, 0.5}, {0.5, 1}, {1, 1}};
  ASSERT_EQ(roc.size(), expected.size());
  for (std::size_t k = 0; k < roc.size(); ++k) {
    EXPECT_EQ(roc[k].fpr, expected[k].first);
    EXPECT_EQ(roc[k].tpr, expected[k].second);
    if (k > 0) {
      const auto m = confusion_metrics(s, roc[k].threshold);
      EXPECT_EQ(m.fp / 2.0, roc[k].fpr);
      EXPECT_EQ(m.tp / 2.0, roc[k].tpr);
    }
  }
}

TEST(Roc, SingleClassRejected) {
  EXPECT_EQ(kind_of([] { roc_curve(scored({0.1, 0.2}, {1, 1})); }), ErrorKind::SingleClassInput);
  EXPECT_EQ(kind_of([] { select_threshold(scored({0.1, 0.2}, {0, 0})); }), ErrorKind::SingleClassInput);
}

TEST(Roc, MonotoneProperty) {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto roc = roc_curve(random_scored(gen, 2 + gen() % 49));
    EXPECT_EQ(roc.front().fpr, 0.0);
    EXPECT_EQ(roc.front().tpr, 0.0);
    EXPECT_EQ(roc.back().fpr, 1.0);
    EXPECT_EQ(roc.back().tpr, 1.0);
    for (std::size_t k = 1; k < roc.size(); ++k) {
      EXPECT_GE(roc[k].fpr, roc[k - 1].fpr);
      EXPECT_GE(roc[k].tpr, roc[k - 1].tpr);
    }
  }
}

TEST(Auc, Examples) {
  EXPECT_EQ(auc(roc_curve(scored({0.1, 0.9}, {0, 1}))), 1.0);
  EXPECT_EQ(auc(roc_curve(scored({0.4, 0.6, 0.5, 0.45}, {0, 1, 0, 1}))), 0.75);
}

TEST(Auc, MatchesMannWhitneyWithTies) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_scored(gen, 2 + gen() % 49);
    EXPECT_NEAR(auc(roc_curve(s)), mann_whitney_auc(s), 1e-9);
  }
}

TEST(Threshold, Examples) {
  EXPECT_EQ(select_threshold(scored({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1})), 0.8);
  EXPECT_EQ(select_threshold(scored({0.7, 0.7, 0.7}, {0, 1, 0})), 0.7);
  EXPECT_EQ(select_threshold(scored({0.4, 0.45, 0.5, 0.6}, {0, 1, 0, 1})), 0.45);
}

TEST(Threshold, MaximizesYoudenByEnumeration) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_scored(gen, 2 + gen() % 40);
    const double chosen = select_threshold(s);
    const auto j_at = [&](double thr) {
      const auto m = confusion_metrics(s, thr);
      return static_cast<double>(m.tp) / (m.tp + m.fn) - static_cast<double>(m.fp) / (m.fp + m.tn);
    };
    double best = -2.0;
    double best_thr = 0.0;
    for (const auto& c : s) {
      const double j = j_at(c.score);
      if (j > best + 1e-12 || (std::abs(j - best) <= 1e-12 && c.score < best_thr)) {
        best = j;
        best_thr = c.score;
      }
    }
    EXPECT_NEAR(j_at(chosen), best, 1e-12);
    EXPECT_EQ(chosen, best_thr);
  }
}

TEST(Confusion, Examples) {
  const auto perfect = confusion_metrics(scored({0.1, 0.9}, {0, 1}), 0.5);
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);

  std::vector<ScoredClip> s;
  for (int i = 0; i < 100; ++i) s.push_back({"c", 0.5, i < 52});
  const auto all = confusion_metrics(s, 0.0);
  EXPECT_EQ(all.recall, 1.0);
  EXPECT_DOUBLE_EQ(all.precision, 0.52);
  EXPECT_DOUBLE_EQ(all.accuracy, 0.52);

  // TP=2, FP=1, TN=1, FN=0
  const auto m = confusion_metrics(scored({0.9, 0.8, 0.7, 0.1}, {1, 1, 0, 0}), 0.5);
  EXPECT_EQ(m.tp, 2u);
  EXPECT_EQ(m.fp, 1u);
  EXPECT_EQ(m.tn, 1u);
  EXPECT_EQ(m.fn, 0u);
  EXPECT_EQ(m.accuracy, 0.75);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_DOUBLE_EQ(m.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.f1, 0.8);
}

TEST(Confusion, UndefinedDenominatorsFlagged) {
  const auto m = confusion_metrics(scored({0.1, 0.2}, {1, 0}), 5.0);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_TRUE(m.precision_undefined);
  EXPECT_EQ(m.f1, 0.0);
  EXPECT_TRUE(m.f1_undefined);
  EXPECT_FALSE(m.recall_undefined);
}

TEST(Confusion, AccuracyIdentity) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_scored(gen, 2 + gen() % 49);
    const auto m = confusion_metrics(s, select_threshold(s));
    const double p = static_cast<double>(m.tp + m.fn);
    const double n = static_cast<double>(m.tn + m.fp);
    EXPECT_NEAR(m.accuracy, (m.recall * p + m.specificity * n) / (p + n), 1e-15);
  }
}

TEST(Metrics, InvariantUnderIncreasingTransform) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto s = random_scored(gen, 2 + gen() % 49);
    const auto a = evaluate(s);
    for (auto& c : s) c.score = 2.0 * c.score + 1.0;
    const auto b = evaluate(s);
    EXPECT_EQ(a.auc, b.auc);
    EXPECT_EQ(a.metrics.tp, b.metrics.tp);
    EXPECT_EQ(a.metrics.fp, b.metrics.fp);
    EXPECT_EQ(a.metrics.accuracy, b.metrics.accuracy);
    EXPECT_EQ(a.metrics.f1, b.metrics.f1);
    EXPECT_EQ(2.0 * a.threshold + 1.0, b.threshold);
  }
}

TEST(Histogram, Examples) {
  const auto h = score_histogram(scored({0.0, 1.0}, {0, 1}), 2, 0.0, 1.0);
  ASSERT_EQ(h.edges.size(), 3u);
  EXPECT_EQ(h.counts[0], (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(h.counts[1], (std::vector<std::size_t>{0, 1}));

  const auto tied = score_histogram(scored({0.4, 0.4, 0.4}, {0, 1, 1}), 5);
  EXPECT_EQ(tied.counts[0][0], 1u);
  EXPECT_EQ(tied.counts[1][0], 2u);

  const auto clamped = score_histogram(scored({-5.0, 5.0}, {0, 0}), 4, 0.0, 1.0);
  EXPECT_EQ(clamped.counts[0], (std::vector<std::size_t>{1, 0, 0, 1}));
  EXPECT_THROW(score_histogram(scored({0.1}, {0}), 0, 0.0, 1.0), Error);
}

TEST(Histogram, CountsConserved) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ScoredClip> s;
  for (int i = 0; i < 200; ++i) s.push_back({"c", u(gen), i % 2 == 0});
  const auto h = score_histogram(s, 7, 0.0, 1.0);
  std::size_t n0 = 0, n1 = 0;
  for (auto c : h.counts[0]) n0 += c;
  for (auto c : h.counts[1]) n1 += c;
  EXPECT_EQ(n0, 100u);
  EXPECT_EQ(n1, 100u);
}

TEST(Evaluate, ReportFields) {
  const auto r = evaluate(scored({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}), std::nullopt, 4);
  EXPECT_EQ(r.auc, 1.0);
  EXPECT_EQ(r.threshold, 0.8);
  EXPECT_EQ(r.metrics.accuracy, 1.0);
  EXPECT_EQ(r.n_normal, 2u);
  EXPECT_EQ(r.n_anomalous, 2u);
  EXPECT_EQ(r.histogram.edges.size(), 5u);
  const auto fixed = evaluate(scored({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}), 0.15);
  EXPECT_EQ(fixed.threshold, 0.15);
  EXPECT_EQ(fixed.metrics.fp, 1u);
}

TEST(RateGrid, FiltersPerCell) {
  // 6-frame clips; label mix decides membership per cell.
  const std::vector<LabeledScore> test{
      ls("n6", 0.1, 6, 0), ls("n5", 0.2, 5, 1), ls("n4", 0.3, 4, 2),
      ls("a3", 0.5, 3, 3), ls("a4", 0.7, 2, 4), ls("a6", 0.9, 0, 6)};
  const std::vector<Rate> rates{Rate(1, 2), Rate(2, 3), Rate(1, 1)};
  const auto grid = rate_grid_report(test, {}, rates, rates, ThresholdMode::Test);
  ASSERT_EQ(grid.cells.size(), 9u);
  const auto& half = grid.at(Rate(1, 2), Rate(1, 2));
  EXPECT_EQ(half.n_clips, 6u);
  EXPECT_EQ(half.n_excluded, 0u);
  ASSERT_TRUE(half.report);
  EXPECT_EQ(half.report->n_anomalous, 3u);
  const auto& full = grid.at(Rate(1, 1), Rate(1, 1));
  EXPECT_EQ(full.n_clips, 2u);
  EXPECT_EQ(full.n_excluded, 4u);
  EXPECT_EQ(full.report->auc, 1.0);
}

TEST(RateGrid, CountsMonotoneInBothRates) {
  std::mt19937_64 gen(7);
  std::vector<LabeledScore> test;
  for (int i = 0; i < 300; ++i) {
    const int ones = static_cast<int>(gen() % 13);
    test.push_back(ls("c" + std::to_string(i), static_cast<double>(gen() % 1000) / 1000.0, 12 - ones, ones));
  }
  const std::vector<Rate> rates{Rate(1, 2), Rate(7, 12), Rate(2, 3), Rate(5, 6), Rate(1, 1)};
  const auto grid = rate_grid_report(test, {}, rates, rates, ThresholdMode::Test);
  for (std::size_t i = 0; i < rates.size(); ++i) {
    for (std::size_t j = 0; j < rates.size(); ++j) {
      const auto& cell = grid.at(rates[i], rates[j]);
      EXPECT_EQ(cell.n_clips + cell.n_excluded, test.size());
      if (i + 1 < rates.size()) {
        EXPECT_LE(grid.at(rates[i + 1], rates[j]).n_clips, cell.n_clips);
      }
      if (j + 1 < rates.size()) {
        EXPECT_LE(grid.at(rates[i], rates[j + 1]).n_clips, cell.n_clips);
        EXPECT_GE(grid.at(rates[i], rates[j + 1]).n_excluded, cell.n_excluded);
      }
    }
  }
  EXPECT_EQ(grid.at(Rate(1, 2), Rate(1, 2)).n_excluded, 0u);
}

TEST(RateGrid, ValidationThresholdIsAppliedToTest) {
  const std::vector<LabeledScore> val{ls("v0", 0.1, 4, 0), ls("v1", 0.4, 0, 4)};
  const std::vector<LabeledScore> test{ls("t0", 0.2, 4, 0), ls("t1", 0.3, 0, 4), ls("t2", 0.5, 0, 4)};
  const std::vector<Rate> half{Rate(1, 2)};
  const auto grid = rate_grid_report(test, val, half, half, ThresholdMode::Validation);
  const auto& cell = grid.at(Rate(1, 2), Rate(1, 2));
  ASSERT_TRUE(cell.report);
  EXPECT_EQ(cell.report->threshold, 0.4);
  EXPECT_EQ(cell.report->metrics.fn, 1u);
  EXPECT_EQ(cell.report->auc, 1.0);
}

TEST(RateGrid, SingleClassCellRecordsError) {
  const std::vector<LabeledScore> test{ls("t0", 0.2, 4, 0), ls("t1", 0.3, 4, 0)};
  const std::vector<Rate> half{Rate(1, 2)};
  const auto grid = rate_grid_report(test, {}, half, half, ThresholdMode::Test);
  const auto& cell = grid.at(Rate(1, 2), Rate(1, 2));
  EXPECT_FALSE(cell.report);
  EXPECT_NE(cell.error.find("SingleClassInput"), std::string::npos);
}
