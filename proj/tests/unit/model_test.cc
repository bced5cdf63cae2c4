/* Copyright 2026 The ACVC Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "acvc/benchmark.hpp"
#include "acvc/model.hpp"
#include "acvc/trainer.hpp"
#include "support/fixtures.hpp"

namespace acvc {
namespace {

using Net = TinyConvNet<double>;
using testing::random_image;

TEST(TinyConvNetTest, ParameterLayout) {
  EXPECT_EQ(Net::count_for(3), 16u * 27 + 16 + 32u * 144 + 32 + 32u * 3);
  Net net = Net::initialized(3, 1);
  EXPECT_EQ(net.parameter_count(), Net::count_for(3));
  EXPECT_EQ(net.conv1_bias().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(net.conv2_bias().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE(net.conv1_weights().cwiseAbs().maxCoeff(), std::sqrt(6.0 / 27));
  EXPECT_LE(net.classifier_weights().cwiseAbs().maxCoeff(), 1.0 / std::sqrt(32.0));
  EXPECT_EQ(Net::initialized(3, 1).parameters(), net.parameters());
  EXPECT_NE(Net::initialized(3, 2).parameters(), net.parameters());
}

TEST(TinyConvNetTest, ZeroNetPredictsUniformly) {
  const Net net(4);
  const ForwardResult r = forward(net, random_image(16, 16, 1));
  for (int c = 0; c < 4; ++c) {
    EXPECT_EQ(r.logits[c], 0.0);
    EXPECT_DOUBLE_EQ(r.probs[c], 0.25);
  }
}

TEST(TinyConvNetTest, LogitsDecomposeThroughCams) {
  const Net net = Net::initialized(3, 9);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ForwardResult r = forward(net, random_image(32, 24, seed));
    EXPECT_EQ(r.features.channels(), 32);
    EXPECT_EQ(r.features.locations(), 8 * 6);
    EXPECT_NEAR(r.probs.sum(), 1.0, 1e-9);
    const Matrix z = net.classifier().weights.transpose() * r.features.values;
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(z.row(c).mean(), r.logits[c], 1e-9);
  }
}

TEST(TinyConvNetTest, RejectsSidesNotDivisibleByFour) {
  const Net net(3);
  EXPECT_THROW(forward(net, ImageBuffer(10, 12, 0.5)), ShapeError);
  EXPECT_THROW(forward(net, ImageBuffer(12, 9, 0.5)), ShapeError);
  EXPECT_NO_THROW(forward(net, ImageBuffer(12, 8, 0.5)));
}

TEST(TinyConvNetTest, ReluBlocksGradientBelowZero) {
  Net net(2);
  net.conv1_bias().setConstant(-10.0);  // every first-layer unit is dead
  net.classifier_weights().setRandom();
  const ImageBuffer img = random_image(8, 8, 3);
  ObjectiveConfig cfg;
  const BatchGradient g = backward(net, {{&img, &img, 0}}, cfg);
  for (double v : g.grad) EXPECT_EQ(v, 0.0);
}

// Largest |analytic - central difference| relative to the largest analytic
// entry, over every parameter.
double network_gradient_error(Net net, const std::vector<TrainingPair>& batch,
                              const ObjectiveConfig& cfg) {
  const BatchGradient g = backward(net, batch, cfg);
  const double h = 1e-6;  // small enough to stay clear of ReLU kinks
  double max_err = 0.0, max_grad = 1e-12;
  auto& p = net.parameters();
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    const double up = batch_loss(net, batch, cfg);
    p[i] = keep - h;
    const double down = batch_loss(net, batch, cfg);
    p[i] = keep;
    const double analytic = g.grad[static_cast<std::size_t>(i)];
    max_err = std::max(max_err, std::abs((up - down) / (2 * h) - analytic));
    max_grad = std::max(max_grad, std::abs(analytic));
  }
  return max_err / max_grad;
}

TEST(BackwardTest, MatchesFiniteDifferences) {
  const ConsistencyMode modes[] = {ConsistencyMode::cam_jsd, ConsistencyMode::cam_mse,
                                   ConsistencyMode::pred_jsd, ConsistencyMode::neg_only,
                                   ConsistencyMode::none};
  for (int trial = 0; trial < 20; ++trial) {
    Net net = Net::initialized(3, 100 + trial);
    net.conv1_bias().setConstant(0.05);
    net.conv2_bias().setConstant(0.05);
    const ImageBuffer a = random_image(8, 8, 2 * trial), b = random_image(8, 8, 2 * trial + 1);
    const ImageBuffer a2 = random_image(8, 8, 500 + trial), b2 = random_image(8, 8, 600 + trial);
    ObjectiveConfig cfg;
    cfg.mode = modes[trial % 5];
    cfg.lambda = 0.5;
    const std::vector<TrainingPair> batch{{&a, &b, trial % 3}, {&a2, &b2, (trial + 1) % 3}};
    EXPECT_LT(network_gradient_error(net, batch, cfg), 1e-3) << "trial " << trial;
  }
}

TEST(BackwardTest, CleanOnlyBatchMatchesFiniteDifferences) {
  Net net = Net::initialized(3, 7);
  const ImageBuffer a = random_image(8, 8, 70);
  EXPECT_LT(network_gradient_error(net, {{&a, nullptr, 2}}, ObjectiveConfig{}), 1e-3);
}

TEST(BackwardTest, IdenticalBranchesDoubleTheCrossEntropyGradient) {
  const Net net = Net::initialized(3, 5);
  const ImageBuffer img = random_image(8, 8, 5);
  ObjectiveConfig cfg;
  cfg.lambda = 0.0;
  const BatchGradient paired = backward(net, {{&img, &img, 1}}, cfg);
  const BatchGradient single = backward(net, {{&img, nullptr, 1}}, cfg);
  for (std::size_t i = 0; i < paired.grad.size(); ++i)
    EXPECT_NEAR(paired.grad[i], 2.0 * single.grad[i], 1e-12);
  EXPECT_NEAR(paired.report.ce, 2.0 * single.report.ce, 1e-12);
  EXPECT_THROW(backward(net, {}, cfg), DomainError);
}

TEST(EvaluateTest, TiesGoToTheLowestClass) {
  const Dataset data = make_benchmark(3, {6, 6, 30}).target_outline;
  const EvalResult r = evaluate(TinyConvNet<float>(3), data);
  EXPECT_NEAR(r.accuracy, 1.0 / 3.0, 1e-12);
  EXPECT_EQ(r.per_class, (std::vector<double>{1.0, 0.0, 0.0}));
  EXPECT_EQ(argmax_lowest((Vector(3) << 0.2, 0.4, 0.4).finished()), 1);
}

TEST(BenchmarkTest, BalancedSizedAndDeterministic) {
  const SyntheticDGBench a = make_benchmark(5, {60, 30, 30});
  const SyntheticDGBench b = make_benchmark(5, {60, 30, 30});
  EXPECT_EQ(a.train.size(), 60u);
  std::vector<int> counts(3, 0);
  for (const auto& s : a.train.samples()) {
    ++counts[static_cast<std::size_t>(s.label)];
    EXPECT_EQ(s.image.height(), 32);
    EXPECT_EQ(s.image.width(), 32);
  }
  EXPECT_EQ(counts, (std::vector<int>{20, 20, 20}));
  for (const Dataset* d : {&a.train, &a.source_val, &a.target_outline, &a.target_inverted}) {
    const Dataset* e = d == &a.train ? &b.train : d == &a.source_val ? &b.source_val
                     : d == &a.target_outline ? &b.target_outline : &b.target_inverted;
    for (std::size_t i = 0; i < d->size(); ++i) ASSERT_EQ((*d)[i].image, (*e)[i].image);
  }
  EXPECT_NE(make_benchmark(6, {60, 30, 30}).train[0].image, a.train[0].image);
  EXPECT_THROW(make_benchmark(5, {61, 30, 30}), DomainError);
}

TEST(BenchmarkTest, DefaultSplitSizes) {
  const BenchmarkSizes s;
  EXPECT_EQ(s.train, 1500);
  EXPECT_EQ(s.source_val, 300);
  EXPECT_EQ(s.target_test, 300);
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

TEST(BenchmarkTest, OutlineTargetIsAShiftedDomain) {
  const SyntheticDGBench bench = make_benchmark(0, {300, 3, 300});
  std::vector<double> source, outline;
  for (const auto& s : bench.train.samples())
    source.insert(source.end(), s.image.values().begin(), s.image.values().end());
  for (const auto& s : bench.target_outline.samples())
    outline.insert(outline.end(), s.image.values().begin(), s.image.values().end());
  EXPECT_GT(ks_statistic(source, outline), 0.2);
}

TEST(BenchmarkTest, InvertedTargetIsTheComplement) {
  const SyntheticDGBench bench = make_benchmark(0, {3, 3, 3});
  const ImageBuffer& img = bench.target_inverted[0].image;
  double sum = 0.0;
  for (double v : img.values()) sum += v;
  EXPECT_GT(sum, 0.0);
  EXPECT_LT(sum, static_cast<double>(img.values().size()));
}

TEST(TrainConfigTest, DefaultsAndValidation) {
  const TrainConfig cfg;
  EXPECT_EQ(cfg.epochs, 30);
  EXPECT_EQ(cfg.batch_size, 128);
  EXPECT_EQ(cfg.learning_rate, 4e-3);
  EXPECT_EQ(cfg.lr_drop_epoch, 24);
  EXPECT_EQ(cfg.lr_drop_factor, 0.1);
  EXPECT_EQ(cfg.lambda, 0.06);
  EXPECT_EQ(cfg.k, 3);
  EXPECT_EQ(cfg.pool, "vc");
  EXPECT_EQ(cfg.mode, ConsistencyMode::cam_jsd);
  EXPECT_DOUBLE_EQ(cfg.learning_rate_at(23), 4e-3);
  EXPECT_DOUBLE_EQ(cfg.learning_rate_at(24), 4e-4);
  TrainConfig bad;
  bad.pool = "sparkles";
  try {
    bad.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("pool"), std::string::npos);
  }
  bad = {};
  bad.batch_size = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = {};
  bad.temperature = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(TrainTest, RunsAreBitReproducible) {
  const SyntheticDGBench bench = make_benchmark(1, {24, 6, 3});
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 8;
  cfg.learning_rate = 0.01;
  const TrainResult a = train(bench.train, cfg, &bench.source_val);
  const TrainResult b = train(bench.train, cfg, &bench.source_val);
  EXPECT_EQ(a.net.parameters(), b.net.parameters());
  EXPECT_EQ(format_metrics_log(a.log), format_metrics_log(b.log));
  cfg.global_seed = 1;
  EXPECT_NE(train(bench.train, cfg).net.parameters(), a.net.parameters());
}

// Slow: five full default-config runs on the benchmark.
TEST(TrainTest, DefaultConfigLossDecreasesForEverySeed) {
  const SyntheticDGBench bench = make_benchmark(0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrainConfig cfg;
    cfg.global_seed = seed;
    const TrainResult r = train(bench.train, cfg);
    ASSERT_EQ(r.log.size(), 30u);
    EXPECT_LT(r.log.back().train_loss, r.log.front().train_loss) << "seed " << seed;
  }
}

TEST(TrainTest, MetricsLineFormat) {
  EXPECT_EQ(format_metrics_line({3, 1.5, 1.25, 0.125, 0.0625, 0.5}),
            "3 1.500000 1.250000 0.125000 0.062500 0.500000");
}

}  // namespace
}  // namespace acvc
