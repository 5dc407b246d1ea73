#include "amtl/training.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "amtl/data_io.hpp"
#include "oracles.hpp"

namespace amtl {
namespace {

EmbeddingNet identity2() {
  EmbeddingNet net;
  Matrix w(2, 2);
  w(0, 0) = 1.0;
  w(1, 1) = 1.0;
  net.layers.push_back({w, {0.0, 0.0}});
  return net;
}

FeatureDataset tiny_dataset(std::vector<DenseVector> feats, std::vector<double> mos = {}) {
  FeatureDataset ds;
  for (std::size_t i = 0; i < feats.size(); ++i) {
    ds.items.push_back({"x" + std::to_string(i), feats[i], mos.empty() ? 3.0 : mos[i]});
  }
  return ds;
}

TrainConfig sgd_config(double lr, MarginMode mode) {
  TrainConfig cfg;
  cfg.optimizer = SgdSpec{lr};
  cfg.margin_mode = mode;
  cfg.shuffle = false;
  return cfg;
}

TEST(Optimizer, SgdStep) {
  std::vector<double> p{1.0, -2.0};
  OptimizerState st;
  optimizer_step(p, std::vector<double>{0.5, -1.0}, st, SgdSpec{0.1});
  EXPECT_DOUBLE_EQ(p[0], 0.95);
  EXPECT_DOUBLE_EQ(p[1], -1.9);
}

TEST(Optimizer, AdamMatchesScalarOracle) {
  std::mt19937_64 rng(2);
  std::vector<double> p = oracle::random_vector(rng, 5);
  std::vector<oracle::ScalarAdam> ref(p.size());
  std::vector<double> q = p;
  OptimizerState st;
  for (int step = 0; step < 50; ++step) {
    const std::vector<double> g = oracle::random_vector(rng, p.size());
    optimizer_step(p, g, st, AdamSpec{});
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = ref[i].step(q[i], g[i]);
  }
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-14);
  EXPECT_EQ(st.step, 50);
}

TEST(Optimizer, AdamZeroGradientIsNoOp) {
  std::vector<double> p{0.3, 0.4};
  OptimizerState st;
  for (int i = 0; i < 5; ++i) optimizer_step(p, std::vector<double>{0.0, 0.0}, st, AdamSpec{});
  EXPECT_EQ(p, (std::vector<double>{0.3, 0.4}));
}

TEST(Collapse, VarianceMatchesOracle) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<DenseVector> rows;
    const std::size_t n = 2 + trial % 30;
    const std::size_t d = 1 + trial % 7;
    for (std::size_t i = 0; i < n; ++i) rows.push_back(oracle::random_vector(rng, d));
    EXPECT_NEAR(mean_coordinate_variance(rows), oracle::brute_force_variance(rows), 1e-14);
  }
}

TEST(Collapse, Detector) {
  const std::vector<DenseVector> same(10, DenseVector{0.6, 0.8});
  EXPECT_TRUE(detect_collapse(same, 1e-6));
  std::vector<DenseVector> spread{{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}};
  EXPECT_FALSE(detect_collapse(spread, 1e-6));
  EXPECT_THROW(mean_coordinate_variance({}), InvalidInput);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  cfg.margin_mode = FixedMargin{2.5};
  EXPECT_THROW(validate(cfg), InvalidConfig);
  cfg = TrainConfig{};
  cfg.optimizer = SgdSpec{0.0};
  EXPECT_THROW(validate(cfg), InvalidConfig);
  cfg = TrainConfig{};
  cfg.loss_weights = {1.0, 0.5};
  EXPECT_THROW(validate(cfg), InvalidConfig);
  cfg.regression = RegressionKind::MAE;
  EXPECT_NO_THROW(validate(cfg));
  cfg.batch_size = 0;
  EXPECT_THROW(validate(cfg), InvalidConfig);
}

TEST(Train, ZeroEpochsReturnsInputUnchanged) {
  const EmbeddingNet net = init_net(std::vector<std::size_t>{2, 3}, Activation::Relu, 1);
  const FeatureDataset ds = tiny_dataset({{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.5}});
  TrainConfig cfg;
  cfg.epochs = 0;
  const TrainResult r = train(net, std::nullopt, ds, {{"x0", "x1", "x2", 0.3}}, cfg);
  EXPECT_EQ(r.net, net);
  EXPECT_TRUE(r.report.epochs.empty());
  EXPECT_FALSE(r.report.collapsed);
}

TEST(Train, SatisfiedQuadrupletsAreAFixedPoint) {
  const EmbeddingNet net = identity2();
  const FeatureDataset ds = tiny_dataset({{1.0, 0.0}, {1.0, 0.01}, {-1.0, 0.0}});
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.margin_mode = FixedMargin{0.5};
  const TrainResult r = train(net, std::nullopt, ds, {{"x0", "x1", "x2", 0.0}}, cfg);
  EXPECT_EQ(r.net, net);
  ASSERT_EQ(r.report.epochs.size(), 5u);
  for (const auto& e : r.report.epochs) {
    EXPECT_EQ(e.triplet_loss, 0.0);
    EXPECT_EQ(e.active_fraction, 0.0);
  }
}

// One full-batch SGD step must equal params - lr * mean gradient, with the
// mean gradient taken by finite differences of the mean hinge loss.
TEST(Train, FullBatchStepUsesMeanGradient) {
  std::mt19937_64 rng(12);
  EmbeddingNet net = init_net(std::vector<std::size_t>{3, 4, 3}, Activation::Tanh, 77);
  for (auto& l : net.layers) l.b = oracle::random_vector(rng, l.b.size(), 0.3);
  std::vector<DenseVector> feats;
  for (int i = 0; i < 6; ++i) feats.push_back(oracle::random_vector(rng, 3, 2.0));
  const FeatureDataset ds = tiny_dataset(feats);
  const std::vector<Quadruplet> quads{{"x0", "x1", "x2", 0.0}, {"x3", "x4", "x5", 0.0},
                                      {"x1", "x3", "x0", 0.0}, {"x5", "x2", "x4", 0.0}};
  const double m = 1.9;  // keeps every hinge active
  TrainConfig cfg = sgd_config(0.05, FixedMargin{m});
  cfg.epochs = 1;
  cfg.batch_size = static_cast<int>(quads.size());

  auto mean_loss = [&](const std::vector<double>& p) {
    EmbeddingNet copy = net;
    unflatten(p, copy);
    double total = 0.0;
    for (const auto& q : quads) {
      auto e = [&](const std::string& id) {
        return oracle::naive_normalize(oracle::naive_forward(copy, feats[std::stoul(id.substr(1))]));
      };
      const auto a = e(q.anchor_id);
      total += std::max(oracle::naive_distance(a, e(q.positive_id)) - oracle::naive_distance(a, e(q.negative_id)) + m,
                        0.0);
    }
    return total / static_cast<double>(quads.size());
  };
  const std::vector<double> before = flatten(net);
  const std::vector<double> grad = oracle::central_differences(mean_loss, before);
  const TrainResult r = train(net, std::nullopt, ds, quads, cfg);
  EXPECT_EQ(r.report.epochs.at(0).active_fraction, 1.0);
  const std::vector<double> after = flatten(r.net);
  std::vector<double> implied(before.size());
  for (std::size_t i = 0; i < before.size(); ++i) implied[i] = (before[i] - after[i]) / 0.05;
  EXPECT_LT(oracle::max_relative_error(implied, grad), 1e-4);
}

TEST(Train, LossDecreasesOnSyntheticData) {
  SyntheticSpec spec;
  spec.n_items = 200;
  const FeatureDataset ds = generate_synthetic(spec);
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto quads = generate_quadruplets_single(ds, 5, seed);
    TrainConfig cfg;
    cfg.epochs = 8;
    cfg.seed = seed;
    const EmbeddingNet net = init_net(std::vector<std::size_t>{8, 32, 16}, Activation::Relu, seed);
    const TrainResult r = train(net, std::nullopt, ds, quads, cfg);
    ratios.push_back(r.report.epochs.back().triplet_loss / r.report.epochs.front().triplet_loss);
  }
  std::sort(ratios.begin(), ratios.end());
  EXPECT_LT(ratios[2], 0.9);
}

TEST(Train, HeadUntouchedWhenBetaIsZero) {
  const EmbeddingNet net = init_net(std::vector<std::size_t>{2, 3}, Activation::Relu, 3);
  const FeatureDataset ds = tiny_dataset({{1.0, 0.2}, {0.1, 1.0}, {-1.0, 0.5}, {0.3, -0.7}});
  const RegressionHead head{{0.1, -0.2, 0.3}, 0.7};
  TrainConfig cfg;
  cfg.epochs = 3;
  const TrainResult r = train(net, head, ds, {{"x0", "x1", "x2", 0.4}, {"x3", "x0", "x1", 0.6}}, cfg);
  ASSERT_TRUE(r.head.has_value());
  EXPECT_EQ(*r.head, head);
}

TEST(Train, RegressionOnlyReducesRegressionLoss) {
  SyntheticSpec spec;
  spec.n_items = 150;
  const FeatureDataset ds = generate_synthetic(spec);
  const auto quads = generate_quadruplets_single(ds, 3, 1);
  TrainConfig cfg;
  cfg.loss_weights = {0.0, 1.0};
  cfg.regression = RegressionKind::MSE;
  cfg.epochs = 10;
  const EmbeddingNet net = init_net(std::vector<std::size_t>{8, 16, 8}, Activation::Relu, 1);
  const TrainResult r = train(net, init_head(8), ds, quads, cfg);
  EXPECT_LT(r.report.epochs.back().regression_loss, 0.5 * r.report.epochs.front().regression_loss);
}

TEST(Train, FixedModeIgnoresStoredMargins) {
  const EmbeddingNet net = init_net(std::vector<std::size_t>{2, 4, 3}, Activation::Tanh, 5);
  const FeatureDataset ds = tiny_dataset({{1.0, 0.2}, {0.1, 1.0}, {-1.0, 0.5}, {0.3, -0.7}});
  std::vector<Quadruplet> a{{"x0", "x1", "x2", 0.1}, {"x3", "x0", "x1", 0.9}};
  std::vector<Quadruplet> b = a;
  b[0].margin = 0.7;
  b[1].margin = 0.0;
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.margin_mode = FixedMargin{0.5};
  EXPECT_EQ(train(net, std::nullopt, ds, a, cfg).net, train(net, std::nullopt, ds, b, cfg).net);
  // The quadruplet list itself is read-only.
  EXPECT_EQ(a[0].margin, 0.1);
}

TEST(Train, DeterministicForSeed) {
  SyntheticSpec spec;
  spec.n_items = 80;
  const FeatureDataset ds = generate_synthetic(spec);
  const auto quads = generate_quadruplets_single(ds, 3, 2);
  const EmbeddingNet net = init_net(std::vector<std::size_t>{8, 8, 4}, Activation::Relu, 2);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 9;
  const TrainResult x = train(net, std::nullopt, ds, quads, cfg);
  const TrainResult y = train(net, std::nullopt, ds, quads, cfg);
  EXPECT_EQ(x.net, y.net);
  EXPECT_EQ(x.report, y.report);
}

TEST(Train, DegenerateQuadrupletsAreSkipped) {
  // Anchor and positive share features, so their embeddings coincide while
  // a margin of 2 keeps the hinge active.
  const FeatureDataset ds = tiny_dataset({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.margin_mode = FixedMargin{2.0};
  const TrainResult r = train(identity2(), std::nullopt, ds, {{"x0", "x1", "x2", 0.0}}, cfg);
  EXPECT_EQ(r.report.skipped_degenerate, 2u);
  EXPECT_EQ(r.net, identity2());
}

TEST(Train, ConstantNetworkIsReportedAsCollapsed) {
  EmbeddingNet net;
  net.layers.push_back({Matrix(2, 2), {1.0, 0.0}});
  const FeatureDataset ds = tiny_dataset({{1.0, 0.0}, {0.5, 0.5}, {0.0, 1.0}});
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.margin_mode = FixedMargin{0.5};
  const TrainResult r = train(net, std::nullopt, ds, {{"x0", "x1", "x2", 0.0}}, cfg);
  EXPECT_TRUE(r.report.collapsed);
  EXPECT_EQ(r.report.collapse_epoch, 2);
  EXPECT_EQ(r.report.epochs.size(), 3u);
}

TEST(Train, RejectsBadInputs) {
  const FeatureDataset ds = tiny_dataset({{1.0, 0.0}, {0.5, std::nan("")}, {0.0, 1.0}});
  TrainConfig cfg;
  EXPECT_THROW(train(identity2(), std::nullopt, ds, {}, cfg), InvalidInput);
  const FeatureDataset ok = tiny_dataset({{1.0, 0.0}, {0.5, 0.5}, {0.0, 1.0}});
  EXPECT_THROW(train(identity2(), std::nullopt, ok, {{"x0", "x1", "nope", 0.1}}, cfg), InvalidInput);
  cfg.loss_weights = {1.0, 0.5};
  cfg.regression = RegressionKind::MAE;
  EXPECT_THROW(train(identity2(), std::nullopt, ok, {}, cfg), InvalidConfig);
}

TEST(Train, OverflowingWeightsRaiseNumericFailure) {
  EmbeddingNet net = identity2();
  net.layers[0].w(0, 0) = 1e308;
  net.layers[0].w(0, 1) = 1e308;
  const FeatureDataset ds = tiny_dataset({{1e10, 1e10}, {0.5, 0.5}, {0.0, 1.0}});
  TrainConfig cfg;
  cfg.epochs = 2;
  EXPECT_THROW(train(net, std::nullopt, ds, {{"x0", "x1", "x2", 0.5}}, cfg), NumericFailure);
}

}  // namespace
}  // namespace amtl
