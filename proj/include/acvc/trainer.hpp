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
#ifndef ACVC_TRAINER_HPP_
#define ACVC_TRAINER_HPP_

#include <cstdint>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "acvc/cam_losses.hpp"
#include "acvc/image.hpp"
#include "acvc/model.hpp"
#include "acvc/random.hpp"
#include "acvc/registry.hpp"
#include "acvc/severity_table.hpp"

namespace acvc {

/// Training runs in single precision; gradient checks use TinyConvNet<double>.
using TrainNet = TinyConvNet<float>;

struct TrainConfig {
  int epochs = 30;
  int batch_size = 128;
  double learning_rate = 4e-3;
  double momentum = 0.9;
  int lr_drop_epoch = 24;
  double lr_drop_factor = 0.1;
  double lambda = kDefaultLambda;
  int k = kDefaultTopK;
  double temperature = kDefaultTemperature;
  std::string pool = "vc";
  ConsistencyMode mode = ConsistencyMode::cam_jsd;
  std::uint64_t global_seed = 0;
  // false: the no-corruption baseline (clean images, single-branch CE).
  bool corrupt = true;

  void validate() const {
    auto fail = [](const std::string& key, const std::string& why) {
      throw ConfigError("config key '" + key + "': " + why);
    };
    if (epochs < 1) fail("epochs", "must be >= 1");
    if (batch_size < 1) fail("batch_size", "must be >= 1");
    if (!(learning_rate > 0.0)) fail("learning_rate", "must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum", "must be in [0, 1)");
    if (lr_drop_epoch < 0) fail("lr_drop_epoch", "must be >= 0");
    if (!(lr_drop_factor > 0.0)) fail("lr_drop_factor", "must be > 0");
    if (!(lambda >= 0.0)) fail("lambda", "must be >= 0");
    if (k < 1) fail("k", "must be >= 1");
    if (!(temperature > 0.0)) fail("temperature", "must be > 0");
    try {
      (void)pool_for(pool);
    } catch (const DomainError& e) {
      fail("pool", e.what());
    }
  }

  ObjectiveConfig objective() const { return {lambda, temperature, k, mode}; }

  double learning_rate_at(int epoch) const {
    return epoch >= lr_drop_epoch ? learning_rate * lr_drop_factor : learning_rate;
  }
};

struct EpochMetrics {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double ce = 0.0;
  double cam = 0.0;
  double neg = 0.0;
  double source_val_acc = 0.0;
};

/// `epoch train_loss ce cam neg source_val_acc`, six decimals.
inline std::string format_metrics_line(const EpochMetrics& m) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d %.6f %.6f %.6f %.6f %.6f", m.epoch, m.train_loss, m.ce,
                m.cam, m.neg, m.source_val_acc);
  return buf;
}

inline std::string format_metrics_log(const std::vector<EpochMetrics>& log) {
  std::string out;
  for (const auto& m : log) out += format_metrics_line(m) + "\n";
  return out;
}

struct EvalResult {
  double accuracy = 0.0;
  std::vector<double> per_class;
};

/// Top-1 accuracy on clean images; ties in the prediction go to the lowest
/// class index.
template <typename Scalar>
EvalResult evaluate(const TinyConvNet<Scalar>& net, const Dataset& data) {
  std::vector<int> hits(static_cast<std::size_t>(data.class_count()), 0);
  std::vector<int> totals(hits.size(), 0);
  ForwardCache<Scalar> cache;
  const auto wc = net.classifier_weights();
  int correct = 0;
  for (const auto& sample : data.samples()) {
    forward_cached(net, sample.image, cache);
    typename TinyConvNet<Scalar>::Vec logits = wc.transpose() * cache.features.rowwise().mean();
    const int predicted = argmax_lowest(logits.template cast<double>());
    ++totals[static_cast<std::size_t>(sample.label)];
    if (predicted == sample.label) {
      ++correct;
      ++hits[static_cast<std::size_t>(sample.label)];
    }
  }
  EvalResult r;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  for (std::size_t c = 0; c < hits.size(); ++c)
    r.per_class.push_back(totals[c] ? static_cast<double>(hits[c]) / totals[c] : 0.0);
  return r;
}

struct TrainResult {
  TrainNet net;
  std::vector<EpochMetrics> log;
};

/// SGD with momentum over the paired objective. Every visit of a sample
/// draws one corruption from the pool with a stream derived from
/// (global_seed, epoch, sample index), so a run is a pure function of the
/// config and the dataset.
inline TrainResult train(const Dataset& data, const TrainConfig& cfg,
                         const Dataset* validation = nullptr,
                         const SeverityTable& table = builtin_severity_table(),
                         const std::function<void(const EpochMetrics&)>& on_epoch = {}) {
  cfg.validate();
  if (data.size() == 0) throw DomainError("training set is empty");
  const std::vector<CorruptionKind> pool = pool_for(cfg.pool);
  const SeedPolicy policy{cfg.global_seed};
  const ObjectiveConfig objective = cfg.objective();

  TrainResult result{TrainNet::initialized(data.class_count(), cfg.global_seed), {}};
  TrainNet& net = result.net;
  TrainNet::Vec velocity = TrainNet::Vec::Zero(static_cast<Eigen::Index>(net.parameter_count()));

  std::vector<std::size_t> order(data.size());
  std::vector<ImageBuffer> corrupted;
  std::vector<TrainingPair> batch;
  constexpr std::uint64_t kShuffleStream = ~0ull;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = policy.stream(static_cast<std::uint64_t>(epoch), kShuffleStream);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[uniform_index(shuffle_rng, i)]);

    const float lr = static_cast<float>(cfg.learning_rate_at(epoch));
    const float mu = static_cast<float>(cfg.momentum);
    EpochMetrics m;
    m.epoch = epoch + 1;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      corrupted.clear();
      corrupted.reserve(stop - start);
      batch.clear();
      for (std::size_t j = start; j < stop; ++j) {
        const LabeledSample& s = data[order[j]];
        if (cfg.corrupt) {
          Rng rng = policy.stream(static_cast<std::uint64_t>(epoch), order[j]);
          const CorruptionSpec spec = sample_corruption(pool, rng);
          corrupted.push_back(apply(spec, s.image, rng, table));
        }
      }
      for (std::size_t j = start; j < stop; ++j) {
        const LabeledSample& s = data[order[j]];
        batch.push_back({&s.image, cfg.corrupt ? &corrupted[j - start] : nullptr, s.label});
      }
      const BatchGradient g = backward(net, batch, objective);
      auto& params = net.parameters();
      for (Eigen::Index p = 0; p < params.size(); ++p) {
        velocity[p] = mu * velocity[p] + static_cast<float>(g.grad[static_cast<std::size_t>(p)]);
        params[p] -= lr * velocity[p];
      }
      const double weight = static_cast<double>(stop - start);
      m.train_loss += g.report.total * weight;
      m.ce += g.report.ce * weight;
      m.cam += g.report.cam * weight;
      m.neg += g.report.neg * weight;
    }
    const double n = static_cast<double>(data.size());
    m.train_loss /= n;
    m.ce /= n;
    m.cam /= n;
    m.neg /= n;
    m.source_val_acc = validation ? evaluate(net, *validation).accuracy : 0.0;
    result.log.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return result;
}

}  // namespace acvc

#endif  // ACVC_TRAINER_HPP_
