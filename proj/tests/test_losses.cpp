#include "amtl/losses.hpp"

#include <gtest/gtest.h>

#include <random>

#include "amtl/errors.hpp"
#include "oracles.hpp"

namespace amtl {
namespace {

TEST(TripletLoss, DirectValues) {
  EXPECT_EQ(triplet_loss(0.3, 0.9, 0.5), 0.0);
  EXPECT_NEAR(triplet_loss(0.9, 0.3, 0.5), 1.1, 1e-15);
  EXPECT_EQ(triplet_loss(0.4, 0.4, 0.0), 0.0);
}

TEST(TripletLoss, RejectsNegativeDistance) {
  EXPECT_THROW(triplet_loss(-0.1, 0.5, 0.1), InvalidInput);
  EXPECT_THROW(triplet_loss(0.1, -0.5, 0.1), InvalidInput);
  EXPECT_THROW(triplet_loss(0.1, 0.5, std::nan("")), InvalidInput);
}

TEST(TripletLoss, ZeroIffOrderingHoldsByMargin) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 10000; ++i) {
    const double ap = u(rng);
    const double an = u(rng);
    const double m = u(rng);
    const double l = triplet_loss(ap, an, m);
    EXPECT_GE(l, 0.0);
    EXPECT_EQ(l == 0.0, ap - an + m <= 0.0);
  }
}

TEST(TripletLoss, Monotonicity) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 5000; ++i) {
    const double ap = u(rng);
    const double an = u(rng);
    const double m = u(rng);
    const double h = 0.25 * u(rng);
    const double base = triplet_loss(ap, an, m);
    EXPECT_GE(triplet_loss(ap + h, an, m), base);
    EXPECT_GE(triplet_loss(ap, an, m + h), base);
    EXPECT_LE(triplet_loss(ap, an + h, m), base);
  }
}

TEST(TripletLossGrads, InactiveHingeHasZeroGradients) {
  const DenseVector a{1.0, 0.0};
  const DenseVector p{0.0, 1.0};
  const DenseVector n{-1.0, 0.0};
  const TripletGrads g = triplet_loss_grads(a, p, n, 0.1);
  EXPECT_EQ(g.loss, 0.0);
  EXPECT_FALSE(g.active());
  for (const auto* v : {&g.g_anchor, &g.g_positive, &g.g_negative}) {
    for (double x : *v) EXPECT_EQ(x, 0.0);
  }
}

TEST(TripletLossGrads, ClosedFormWhenActive) {
  const DenseVector a{1.0, 0.0};
  const DenseVector p{-1.0, 0.0};
  const DenseVector n{0.0, 1.0};
  const TripletGrads g = triplet_loss_grads(a, p, n, 0.5);
  EXPECT_NEAR(g.loss, 2.0 - std::sqrt(2.0) + 0.5, 1e-15);
  EXPECT_NEAR(g.g_positive[0], -1.0, 1e-15);
  EXPECT_NEAR(g.g_negative[0], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(g.g_negative[1], -1.0 / std::sqrt(2.0), 1e-15);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(g.g_anchor[i] + g.g_positive[i] + g.g_negative[i], 0.0, 1e-15);
  }
}

TEST(TripletLossGrads, MatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> margin(0.5, 2.0);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t d = 2 + trial % 7;
    const DenseVector a = l2_normalize(oracle::random_vector(rng, d));
    const DenseVector p = l2_normalize(oracle::random_vector(rng, d));
    const DenseVector n = l2_normalize(oracle::random_vector(rng, d));
    const double m = margin(rng);
    const TripletGrads g = triplet_loss_grads(a, p, n, m);
    if (!g.active() || g.loss < 1e-3) continue;
    ++checked;
    std::vector<double> packed(a);
    packed.insert(packed.end(), p.begin(), p.end());
    packed.insert(packed.end(), n.begin(), n.end());
    auto f = [&](const std::vector<double>& v) {
      const std::vector<double> va(v.begin(), v.begin() + d);
      const std::vector<double> vp(v.begin() + d, v.begin() + 2 * d);
      const std::vector<double> vn(v.begin() + 2 * d, v.end());
      return std::max(oracle::naive_distance(va, vp) - oracle::naive_distance(va, vn) + m, 0.0);
    };
    std::vector<double> analytic(g.g_anchor);
    analytic.insert(analytic.end(), g.g_positive.begin(), g.g_positive.end());
    analytic.insert(analytic.end(), g.g_negative.begin(), g.g_negative.end());
    EXPECT_LT(oracle::max_relative_error(analytic, oracle::central_differences(f, packed)), 1e-4);
  }
  EXPECT_GT(checked, 200);
}

TEST(TripletLossGrads, CoincidentEmbeddingsUnderActiveHingeThrow) {
  const DenseVector a{1.0, 0.0};
  EXPECT_THROW(triplet_loss_grads(a, a, DenseVector{0.0, 1.0}, 2.0), DegeneratePair);
  EXPECT_THROW(triplet_loss_grads(a, DenseVector{0.0, 1.0}, a, 0.1), DegeneratePair);
  // Inactive hinge with coincident A/P is fine.
  EXPECT_NO_THROW(triplet_loss_grads(a, a, DenseVector{-1.0, 0.0}, 0.5));
}

TEST(TripletLossGrads, ZeroLossAchievableOnSphere) {
  // Antipodal negative, coincident positive: d_ap = 0, d_an = 2 >= m for m <= 2.
  const DenseVector a{0.0, 1.0, 0.0};
  const DenseVector n{0.0, -1.0, 0.0};
  for (double m : {0.0, 0.5, 1.0}) {
    EXPECT_EQ(triplet_loss_grads(a, a, n, m).loss, 0.0) << "m=" << m;
  }
}

TEST(RegressionLoss, Values) {
  for (auto kind : {RegressionKind::MAE, RegressionKind::MSE}) {
    const RegressionLoss r = regression_loss(2.0, 2.0, kind);
    EXPECT_EQ(r.loss, 0.0);
    EXPECT_EQ(r.dpred, 0.0);
  }
  const RegressionLoss mae = regression_loss(3.5, 3.0, RegressionKind::MAE);
  EXPECT_EQ(mae.loss, 0.5);
  EXPECT_EQ(mae.dpred, 1.0);
  EXPECT_EQ(regression_loss(2.5, 3.0, RegressionKind::MAE).dpred, -1.0);
  const RegressionLoss mse = regression_loss(3.5, 3.0, RegressionKind::MSE);
  EXPECT_EQ(mse.loss, 0.25);
  EXPECT_EQ(mse.dpred, 1.0);
}

TEST(CombinedLoss, WeightsAndLinearity) {
  EXPECT_EQ(combined_loss(0.7, 0.3, {1.0, 0.0}), 0.7);
  EXPECT_EQ(combined_loss(0.7, 0.3, {0.0, 1.0}), 0.3);
  EXPECT_NEAR(combined_loss(0.2, 0.4, {1.0, 0.5}), 0.4, 1e-15);
  const LossWeights w{0.8, 0.3};
  EXPECT_NEAR(combined_loss(0.2 + 0.5, 0.1, w), combined_loss(0.2, 0.1, w) + combined_loss(0.5, 0.0, w), 1e-15);
}

TEST(LossWeights, Validation) {
  EXPECT_NO_THROW(validate(LossWeights{1.0, 0.1}));
  EXPECT_THROW(validate(LossWeights{0.0, 0.0}), InvalidConfig);
  EXPECT_THROW(validate(LossWeights{-1.0, 2.0}), InvalidConfig);
}

TEST(MarginMode, Resolution) {
  EXPECT_EQ(resolve_margin(FixedMargin{0.5}, 0.9), 0.5);
  EXPECT_EQ(resolve_margin(AdaptiveMargin{}, 0.9), 0.9);
}

}  // namespace
}  // namespace amtl
