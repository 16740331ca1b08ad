#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <utility>

#include "drowsy/error.hpp"
#include "drowsy/rng.hpp"
#include "drowsy/training.hpp"
#include "support.hpp"

using namespace drowsy;
using testing_support::random_matrix;
using testing_support::random_params;

namespace {

// Smooth unit-norm sequence: a slow sinusoid per dimension around a baseline.
FeatureSequence smooth_clip(Eigen::Index n, Eigen::Index d, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> base(0.4, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 6.283);
  FeatureSequence f(n, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double b = base(gen);
    const double ph = phase(gen);
    for (Eigen::Index t = 0; t < n; ++t) f(t, k) = b + 0.2 * std::sin(0.1 * t + ph);
  }
  for (Eigen::Index t = 0; t < n; ++t) f.row(t).normalize();
  return f;
}

double total_abs(const AutoencoderParams& p) {
  double s = 0.0;
  p.for_each_tensor([&](std::string_view, Eigen::Map<const Eigen::MatrixXd> m) { s += m.cwiseAbs().sum(); });
  return s;
}

}  // namespace

TEST(Rng, DeterministicAndSeedSensitive) {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
  }
  EXPECT_NE(Rng(5).next(), Rng(6).next());
  EXPECT_NE(derive_seed(1, "split"), derive_seed(1, "train"));
  EXPECT_EQ(derive_seed(1, "split"), derive_seed(1, "split"));
  EXPECT_NE(derive_seed(1, std::uint64_t{0}), derive_seed(1, std::uint64_t{1}));
}

TEST(Rng, RangesRespected) {
  Rng r(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(r.below(7), 7u);
    const double v = r.uniform(-2.0, 3.0);
    EXPECT_GE(v, -2.0);
    EXPECT_LT(v, 3.0);
  }
}

TEST(Init, UniformWithinBound) {
  const auto p = init_params(5, 16, 7);
  const double bound = 0.25;
  double max_abs = 0.0;
  p.for_each_tensor([&](std::string_view, Eigen::Map<const Eigen::MatrixXd> m) {
    max_abs = std::max(max_abs, m.cwiseAbs().maxCoeff());
  });
  EXPECT_LE(max_abs, bound);
  EXPECT_GT(max_abs, 0.9 * bound);
  EXPECT_TRUE(init_params(5, 16, 7) == p);
  EXPECT_FALSE(init_params(5, 16, 8) == p);
}

TEST(BatchGradient, IsMeanOfClipGradients) {
  std::mt19937_64 gen(1);
  const auto p = random_params(3, 4, gen);
  const FeatureSequence a = random_matrix(4, 3, gen);
  const FeatureSequence b = random_matrix(4, 3, gen);
  AutoencoderParams g;
  const double loss = batch_gradient({&a, &b}, p, g);
  const auto ga = backward(a, p);
  const auto gb = backward(b, p);
  EXPECT_NEAR(loss, ga.loss + gb.loss, 1e-12);
  EXPECT_TRUE(g.out_weight.isApprox(0.5 * (ga.grad.out_weight + gb.grad.out_weight), 1e-14));
  EXPECT_TRUE(g.encoder[0].W.isApprox(0.5 * (ga.grad.encoder[0].W + gb.grad.encoder[0].W), 1e-14));
}

TEST(Sgd, ClippingBoundsTheStep) {
  std::mt19937_64 gen(2);
  const auto p = random_params(3, 4, gen);
  const FeatureSequence f = random_matrix(4, 3, gen);
  const auto g = backward(f, p).grad;
  auto clipped = p;
  sgd_step(clipped, g, 1.0, 1e-3);
  double sq = 0.0;
  std::vector<Eigen::Map<const Eigen::MatrixXd>> before;
  p.for_each_tensor([&](std::string_view, Eigen::Map<const Eigen::MatrixXd> m) { before.push_back(m); });
  std::size_t k = 0;
  std::as_const(clipped).for_each_tensor([&](std::string_view, Eigen::Map<const Eigen::MatrixXd> m) {
    sq += (m - before[k++]).squaredNorm();
  });
  EXPECT_NEAR(std::sqrt(sq), 1e-3, 1e-12);
}

TEST(Sgd, LineSearchDecreasesLoss) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_params(4, 6, gen);
    const FeatureSequence f = random_matrix(5, 4, gen);
    const auto lg = backward(f, p);
    bool decreased = false;
    double lr = 1.0;
    for (int halvings = 0; halvings <= 20 && !decreased; ++halvings, lr *= 0.5) {
      auto q = p;
      sgd_step(q, lg.grad, lr);
      decreased = clip_loss(f, reconstruct(f, q)) < lg.loss;
    }
    EXPECT_TRUE(decreased) << "trial " << trial;
  }
}

TEST(Train, ZeroLearningRateKeepsInitialParameters) {
  std::mt19937_64 gen(4);
  std::vector<FeatureSequence> clips{smooth_clip(6, 3, gen), smooth_clip(6, 3, gen)};
  TrainConfig cfg;
  cfg.hidden_size = 4;
  cfg.learning_rate = 0.0;
  cfg.epochs = 5;
  cfg.seed = 17;
  const auto r = train(clips, cfg);
  EXPECT_TRUE(r.params == init_params(3, 4, 17));
  ASSERT_EQ(r.epoch_loss.size(), 5u);
  for (double l : r.epoch_loss) EXPECT_EQ(l, r.epoch_loss.front());
}

TEST(Train, DeterministicGivenSeed) {
  std::mt19937_64 gen(5);
  std::vector<FeatureSequence> clips;
  for (int i = 0; i < 6; ++i) clips.push_back(smooth_clip(5, 3, gen));
  TrainConfig cfg;
  cfg.hidden_size = 5;
  cfg.epochs = 4;
  cfg.batch_size = 4;
  cfg.seed = 9;
  const auto a = train(clips, cfg);
  const auto b = train(clips, cfg);
  EXPECT_TRUE(a.params == b.params);
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
  cfg.seed = 10;
  EXPECT_FALSE(train(clips, cfg).params == a.params);
}

TEST(Train, SingleRepeatedClipConverges) {
  std::mt19937_64 gen(6);
  const FeatureSequence clip = smooth_clip(12, 8, gen);
  std::vector<FeatureSequence> clips(4, clip);
  TrainConfig cfg;
  cfg.hidden_size = 16;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 4;
  cfg.epochs = 200;
  const auto r = train(clips, cfg);
  ASSERT_EQ(r.epoch_loss.size(), 200u);
  EXPECT_LT(r.epoch_loss.back(), 0.1 * r.epoch_loss.front());
}

TEST(Train, DivergenceDetected) {
  std::mt19937_64 gen(7);
  std::vector<FeatureSequence> clips{smooth_clip(4, 3, gen)};
  TrainConfig cfg;
  cfg.hidden_size = 3;
  cfg.learning_rate = 1e300;
  cfg.epochs = 5;
  try {
    train(clips, cfg);
    FAIL() << "expected DivergenceDetected";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DivergenceDetected);
  }
}

TEST(Train, InvalidConfigRejected) {
  std::mt19937_64 gen(8);
  std::vector<FeatureSequence> clips{smooth_clip(4, 3, gen)};
  TrainConfig cfg;
  cfg.hidden_size = 0;
  EXPECT_THROW(train(clips, cfg), Error);
  cfg.hidden_size = 2;
  cfg.learning_rate = -1.0;
  EXPECT_THROW(train(clips, cfg), Error);
  EXPECT_THROW(train(std::vector<FeatureSequence>{}, TrainConfig{}), Error);
}

TEST(Train, EarlyStoppingKeepsBestValidationParameters) {
  std::mt19937_64 gen(9);
  std::vector<FeatureSequence> clips;
  for (int i = 0; i < 4; ++i) clips.push_back(smooth_clip(6, 3, gen));
  // Validation data unlike the training data, so its loss turns up quickly.
  std::vector<FeatureSequence> val{random_matrix(6, 3, gen, 3.0)};
  std::vector<const FeatureSequence*> val_ptrs{&val[0]};
  std::vector<const FeatureSequence*> ptrs;
  for (const auto& c : clips) ptrs.push_back(&c);

  TrainConfig cfg;
  cfg.hidden_size = 4;
  cfg.learning_rate = 0.05;
  cfg.epochs = 300;
  cfg.patience = 3;
  const BatchSource source = [&](std::size_t) { return std::vector<ClipBatch>{ptrs}; };
  const auto r = train(source, 3, cfg, val_ptrs);
  ASSERT_FALSE(r.val_loss.empty());
  const auto best = std::min_element(r.val_loss.begin(), r.val_loss.end());
  EXPECT_EQ(r.best_epoch, static_cast<std::size_t>(best - r.val_loss.begin()) + 1);
  EXPECT_DOUBLE_EQ(mean_clip_loss(val_ptrs, r.params), *best);
  if (r.stopped_early) {
    EXPECT_EQ(r.val_loss.size(), r.best_epoch + cfg.patience);
  }
  EXPECT_GT(total_abs(r.params), 0.0);
}
