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
#ifndef ACVC_MODEL_HPP_
#define ACVC_MODEL_HPP_

// TinyConvNet: conv3x3(3->16) relu maxpool2 conv3x3(16->32) relu maxpool2,
// global average pooling, linear classifier without bias. The feature map
// before pooling is exposed so that CAMs and logits share the same weights:
// logits = W^T mean_s(g(x)).

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "acvc/cam_losses.hpp"
#include "acvc/errors.hpp"
#include "acvc/image.hpp"
#include "acvc/random.hpp"

namespace acvc {

template <typename Scalar>
class TinyConvNet {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatMap = Eigen::Map<Mat>;
  using ConstMatMap = Eigen::Map<const Mat>;
  using VecMap = Eigen::Map<Vec>;
  using ConstVecMap = Eigen::Map<const Vec>;

  static constexpr int kInChannels = 3;
  static constexpr int kConv1Channels = 16;
  static constexpr int kConv2Channels = 32;
  static constexpr int kFeatureChannels = kConv2Channels;
  static constexpr int kConv1Fan = kInChannels * 9;
  static constexpr int kConv2Fan = kConv1Channels * 9;

  TinyConvNet() = default;
  explicit TinyConvNet(int class_count)
      : class_count_(class_count), params_(Vec::Zero(count_for(class_count))) {
    if (class_count < 1) throw DomainError("class count must be >= 1");
  }

  /// Fan-in scaled uniform weights, zero biases.
  static TinyConvNet initialized(int class_count, std::uint64_t seed) {
    TinyConvNet net(class_count);
    Rng rng(mix64(seed ^ 0x5EEDull));
    auto fill = [&](auto&& block, double bound) {
      for (Eigen::Index i = 0; i < block.size(); ++i)
        block.data()[i] = static_cast<Scalar>(uniform(rng, -bound, bound));
    };
    fill(net.conv1_weights(), std::sqrt(6.0 / kConv1Fan));
    fill(net.conv2_weights(), std::sqrt(6.0 / kConv2Fan));
    fill(net.classifier_weights(), 1.0 / std::sqrt(static_cast<double>(kFeatureChannels)));
    return net;
  }

  static std::size_t count_for(int class_count) {
    return static_cast<std::size_t>(kConv1Channels) * kConv1Fan + kConv1Channels +
           static_cast<std::size_t>(kConv2Channels) * kConv2Fan + kConv2Channels +
           static_cast<std::size_t>(kFeatureChannels) * class_count;
  }

  int class_count() const { return class_count_; }
  std::size_t parameter_count() const { return static_cast<std::size_t>(params_.size()); }
  Vec& parameters() { return params_; }
  const Vec& parameters() const { return params_; }

  // Parameter blocks are views into one flat vector:
  // [conv1 W | conv1 b | conv2 W | conv2 b | classifier W].
  MatMap conv1_weights() { return {params_.data() + off_w1(), kConv1Channels, kConv1Fan}; }
  VecMap conv1_bias() { return {params_.data() + off_b1(), kConv1Channels}; }
  MatMap conv2_weights() { return {params_.data() + off_w2(), kConv2Channels, kConv2Fan}; }
  VecMap conv2_bias() { return {params_.data() + off_b2(), kConv2Channels}; }
  MatMap classifier_weights() {
    return {params_.data() + off_wc(), kFeatureChannels, class_count_};
  }
  ConstMatMap conv1_weights() const {
    return {params_.data() + off_w1(), kConv1Channels, kConv1Fan};
  }
  ConstVecMap conv1_bias() const { return {params_.data() + off_b1(), kConv1Channels}; }
  ConstMatMap conv2_weights() const {
    return {params_.data() + off_w2(), kConv2Channels, kConv2Fan};
  }
  ConstVecMap conv2_bias() const { return {params_.data() + off_b2(), kConv2Channels}; }
  ConstMatMap classifier_weights() const {
    return {params_.data() + off_wc(), kFeatureChannels, class_count_};
  }

  Classifier classifier() const { return {classifier_weights().template cast<double>()}; }

  template <typename Other>
  TinyConvNet<Other> cast() const {
    TinyConvNet<Other> out(class_count_);
    out.parameters() = params_.template cast<Other>();
    return out;
  }

  static std::size_t off_w1() { return 0; }
  static std::size_t off_b1() { return off_w1() + kConv1Channels * kConv1Fan; }
  static std::size_t off_w2() { return off_b1() + kConv1Channels; }
  static std::size_t off_b2() { return off_w2() + kConv2Channels * kConv2Fan; }
  static std::size_t off_wc() { return off_b2() + kConv2Channels; }

 private:
  int class_count_ = 0;
  Vec params_;
};

namespace detail {

// Activations are (channels x pixels), row-major so that each channel is a
// contiguous image; pixel index p = y * width + x. Column-buffer row
// c * 9 + (ky + 1) * 3 + (kx + 1) holds channel c shifted by (ky, kx).
template <typename Act>
void im2col3x3(const Act& in, int h, int w, Act& col) {
  static_assert(Act::IsRowMajor, "activations are row-major");
  using Scalar = typename Act::Scalar;
  const auto channels = static_cast<int>(in.rows());
  col.resize(channels * 9, static_cast<Eigen::Index>(h) * w);
  for (int c = 0; c < channels; ++c) {
    const Scalar* src = in.row(c).data();
    for (int k = 0; k < 9; ++k) {
      const int dy = k / 3 - 1, dx = k % 3 - 1;
      Scalar* dst = col.row(c * 9 + k).data();
      for (int y = 0; y < h; ++y) {
        Scalar* out = dst + static_cast<std::ptrdiff_t>(y) * w;
        const int sy = y + dy;
        if (sy < 0 || sy >= h) {
          std::fill(out, out + w, Scalar(0));
          continue;
        }
        const Scalar* row = src + static_cast<std::ptrdiff_t>(sy) * w;
        const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
        std::fill(out, out + x0, Scalar(0));
        std::copy(row + x0 + dx, row + x1 + dx, out + x0);
        std::fill(out + x1, out + w, Scalar(0));
      }
    }
  }
}

template <typename Act>
void col2im3x3(const Act& col, int channels, int h, int w, Act& out) {
  static_assert(Act::IsRowMajor, "activations are row-major");
  using Scalar = typename Act::Scalar;
  out.setZero(channels, static_cast<Eigen::Index>(h) * w);
  for (int c = 0; c < channels; ++c) {
    Scalar* dst = out.row(c).data();
    for (int k = 0; k < 9; ++k) {
      const int dy = k / 3 - 1, dx = k % 3 - 1;
      const Scalar* src = col.row(c * 9 + k).data();
      const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
      const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
      for (int y = y0; y < y1; ++y) {
        const Scalar* in = src + static_cast<std::ptrdiff_t>(y) * w;
        Scalar* acc = dst + static_cast<std::ptrdiff_t>(y + dy) * w + dx;
        for (int x = x0; x < x1; ++x) acc[x] += in[x];
      }
    }
  }
}

// 2x2 max pooling, stride 2. Ties go to the first element in
// (top-left, top-right, bottom-left, bottom-right) order.
template <typename Act>
void maxpool2(const Act& in, int h, int w, Act& out, std::vector<int>& argmax) {
  const int oh = h / 2, ow = w / 2;
  const auto channels = in.rows();
  out.resize(channels, static_cast<Eigen::Index>(oh) * ow);
  argmax.resize(static_cast<std::size_t>(channels) * oh * ow);
  for (Eigen::Index c = 0; c < channels; ++c) {
    const auto* src = in.row(c).data();
    auto* dst = out.row(c).data();
    int* arg = argmax.data() + static_cast<std::size_t>(c) * oh * ow;
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        const int base = 2 * oy * w + 2 * ox;
        const int cand[4] = {base, base + 1, base + w, base + w + 1};
        int best = cand[0];
        for (int i = 1; i < 4; ++i)
          if (src[cand[i]] > src[best]) best = cand[i];
        dst[oy * ow + ox] = src[best];
        arg[oy * ow + ox] = best;
      }
  }
}

template <typename Act>
void maxunpool2(const Act& d_out, const std::vector<int>& argmax, int h, int w, Act& d_in) {
  const auto channels = d_out.rows(), q_count = d_out.cols();
  d_in.setZero(channels, static_cast<Eigen::Index>(h) * w);
  for (Eigen::Index c = 0; c < channels; ++c) {
    const int* arg = argmax.data() + static_cast<std::size_t>(c * q_count);
    for (Eigen::Index q = 0; q < q_count; ++q) d_in(c, arg[q]) += d_out(c, q);
  }
}

}  // namespace detail

/// Intermediate activations kept for the backward pass.
template <typename Scalar>
struct ForwardCache {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  int height = 0, width = 0;
  Mat col1, pre1, pool1, col2, pre2, features;
  std::vector<int> arg1, arg2;
  // Scratch reused across calls so the hot loop does not allocate.
  mutable Mat input, act, d_feat, d_act2, d_col2, d_pool1, d_act1;
};

struct ForwardResult {
  FeatureMap features;  // n = 32, s = (H/4) * (W/4)
  Vector logits;
  Vector probs;
};

inline void check_net_input(const ImageBuffer& img) {
  if (img.height() % 4 != 0 || img.width() % 4 != 0)
    throw ShapeError("TinyConvNet needs sides divisible by 4, got " +
                     std::to_string(img.height()) + "x" + std::to_string(img.width()));
}

template <typename Scalar>
void forward_cached(const TinyConvNet<Scalar>& net, const ImageBuffer& img,
                    ForwardCache<Scalar>& cache) {
  using Mat = typename ForwardCache<Scalar>::Mat;
  check_net_input(img);
  const int h = img.height(), w = img.width();
  cache.height = h;
  cache.width = w;
  // Pixels enter the network rescaled to [-1, 1].
  Mat& input = cache.input;
  input.resize(kChannels, static_cast<Eigen::Index>(h) * w);
  for (int c = 0; c < kChannels; ++c) {
    auto ch = img.channel(c);
    for (std::size_t p = 0; p < ch.size(); ++p)
      input(c, static_cast<Eigen::Index>(p)) = static_cast<Scalar>(2.0 * ch[p] - 1.0);
  }
  detail::im2col3x3(input, h, w, cache.col1);
  cache.pre1.noalias() = net.conv1_weights() * cache.col1;
  cache.pre1.colwise() += net.conv1_bias();
  cache.act = cache.pre1.cwiseMax(Scalar(0));
  detail::maxpool2(cache.act, h, w, cache.pool1, cache.arg1);

  detail::im2col3x3(cache.pool1, h / 2, w / 2, cache.col2);
  cache.pre2.noalias() = net.conv2_weights() * cache.col2;
  cache.pre2.colwise() += net.conv2_bias();
  cache.act = cache.pre2.cwiseMax(Scalar(0));
  detail::maxpool2(cache.act, h / 2, w / 2, cache.features, cache.arg2);
}

/// Features, logits and class probabilities for one image.
template <typename Scalar>
ForwardResult forward(const TinyConvNet<Scalar>& net, const ImageBuffer& img) {
  ForwardCache<Scalar> cache;
  forward_cached(net, img, cache);
  ForwardResult out;
  out.features.values = cache.features.template cast<double>();
  out.logits = class_logits(out.features, net.classifier());
  out.probs = softmax(out.logits);
  return out;
}

/// Backpropagates d loss / d features through the convolutional trunk and
/// accumulates into `grad` (same layout as the parameter vector). The
/// classifier block of `grad` is left untouched.
template <typename Scalar>
void backward_trunk(const TinyConvNet<Scalar>& net, const ForwardCache<Scalar>& cache,
                    const Matrix& d_features, typename TinyConvNet<Scalar>::Vec& grad) {
  using Net = TinyConvNet<Scalar>;
  using Mat = typename ForwardCache<Scalar>::Mat;
  const int h = cache.height, w = cache.width;
  Mat& d_feat = cache.d_feat;
  d_feat = d_features.template cast<Scalar>();

  // ReLU backward is applied in place on the unpooled gradient.
  Mat& d_pre2 = cache.d_act2;
  detail::maxunpool2(d_feat, cache.arg2, h / 2, w / 2, d_pre2);
  d_pre2.array() *= (cache.pre2.array() > Scalar(0)).template cast<Scalar>();
  Eigen::Map<typename Net::Mat>(grad.data() + Net::off_w2(), Net::kConv2Channels, Net::kConv2Fan)
      .noalias() += d_pre2 * cache.col2.transpose();
  Eigen::Map<typename Net::Vec>(grad.data() + Net::off_b2(), Net::kConv2Channels) +=
      d_pre2.rowwise().sum();

  Mat& d_col2 = cache.d_col2;
  d_col2.noalias() = net.conv2_weights().transpose() * d_pre2;
  detail::col2im3x3(d_col2, Net::kConv1Channels, h / 2, w / 2, cache.d_pool1);
  Mat& d_pre1 = cache.d_act1;
  detail::maxunpool2(cache.d_pool1, cache.arg1, h, w, d_pre1);
  d_pre1.array() *= (cache.pre1.array() > Scalar(0)).template cast<Scalar>();
  Eigen::Map<typename Net::Mat>(grad.data() + Net::off_w1(), Net::kConv1Channels, Net::kConv1Fan)
      .noalias() += d_pre1 * cache.col1.transpose();
  Eigen::Map<typename Net::Vec>(grad.data() + Net::off_b1(), Net::kConv1Channels) +=
      d_pre1.rowwise().sum();
}

template <typename Scalar>
void add_classifier_grad(const Matrix& d_weights, typename TinyConvNet<Scalar>::Vec& grad) {
  using Net = TinyConvNet<Scalar>;
  Eigen::Map<typename Net::Mat>(grad.data() + Net::off_wc(), d_weights.rows(),
                                d_weights.cols()) += d_weights.template cast<Scalar>();
}

/// One (clean, corrupted, label) training triple.
struct TrainingPair {
  const ImageBuffer* clean = nullptr;
  const ImageBuffer* corrupt = nullptr;  // null: clean-only cross-entropy
  int label = 0;
};

struct BatchGradient {
  LossReport report;        // batch means of every term
  std::vector<double> grad;  // d mean loss / d parameters
};

/// Single-branch cross-entropy on the clean image; the no-corruption
/// baseline trains on this instead of the paired objective.
inline ObjectiveGradients clean_only_gradients(const FeatureMap& features,
                                               const Classifier& classifier, int label) {
  check_compatible(features, classifier);
  check_label(label, classifier.class_count());
  const Vector pooled = features.values.rowwise().mean();
  const Vector probs = softmax(classifier.weights.transpose() * pooled);
  ObjectiveGradients out;
  out.report.ce = -floored_log(probs[label]);
  out.report.total = out.report.ce;
  out.report.mode = ConsistencyMode::none;
  Vector d_logits = probs;
  d_logits[label] -= 1.0;
  out.d_weights = pooled * d_logits.transpose();
  out.d_features_clean = (classifier.weights * d_logits / static_cast<double>(features.locations()))
                             .replicate(1, features.locations());
  return out;
}

/// Mean objective over a batch and its gradient with respect to every
/// network parameter, through both branches.
template <typename Scalar>
BatchGradient backward(const TinyConvNet<Scalar>& net, const std::vector<TrainingPair>& batch,
                       const ObjectiveConfig& cfg) {
  using Vec = typename TinyConvNet<Scalar>::Vec;
  if (batch.empty()) throw DomainError("backward needs a nonempty batch");
  Vec grad = Vec::Zero(static_cast<Eigen::Index>(net.parameter_count()));
  const Classifier classifier = net.classifier();
  BatchGradient out;
  out.report.lambda = cfg.lambda;
  out.report.mode = cfg.mode;
  ForwardCache<Scalar> clean_cache, corrupt_cache;
  for (const TrainingPair& item : batch) {
    forward_cached(net, *item.clean, clean_cache);
    const FeatureMap clean{clean_cache.features.template cast<double>()};
    ObjectiveGradients g;
    if (item.corrupt) {
      forward_cached(net, *item.corrupt, corrupt_cache);
      const FeatureMap corrupt{corrupt_cache.features.template cast<double>()};
      g = objective_gradients(clean, corrupt, classifier, item.label, cfg);
      backward_trunk(net, corrupt_cache, g.d_features_corrupt, grad);
    } else {
      g = clean_only_gradients(clean, classifier, item.label);
    }
    backward_trunk(net, clean_cache, g.d_features_clean, grad);
    add_classifier_grad<Scalar>(g.d_weights, grad);
    out.report.ce += g.report.ce;
    out.report.cam += g.report.cam;
    out.report.neg += g.report.neg;
    out.report.total += g.report.total;
  }
  const double n = static_cast<double>(batch.size());
  out.report.ce /= n;
  out.report.cam /= n;
  out.report.neg /= n;
  out.report.total /= n;
  grad /= static_cast<Scalar>(n);
  out.grad.assign(grad.data(), grad.data() + grad.size());
  return out;
}

/// Mean objective over a batch without gradients (used by finite-difference
/// checks).
template <typename Scalar>
double batch_loss(const TinyConvNet<Scalar>& net, const std::vector<TrainingPair>& batch,
                  const ObjectiveConfig& cfg) {
  const Classifier classifier = net.classifier();
  double total = 0.0;
  for (const TrainingPair& item : batch) {
    const ForwardResult clean = forward(net, *item.clean);
    if (item.corrupt) {
      const ForwardResult corrupt = forward(net, *item.corrupt);
      total += objective_gradients(clean.features, corrupt.features, classifier, item.label,
                                   cfg, /*want_gradients=*/false)
                   .report.total;
    } else {
      total += -floored_log(clean.probs[item.label]);
    }
  }
  return total / static_cast<double>(batch.size());
}

/// Index of the largest probability; ties go to the lowest class index.
inline int argmax_lowest(const Vector& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace acvc

#endif  // ACVC_MODEL_HPP_
