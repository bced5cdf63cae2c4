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
#ifndef ACVC_IMAGE_HPP_
#define ACVC_IMAGE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "acvc/errors.hpp"

namespace acvc {

inline constexpr int kChannels = 3;
inline constexpr int kMinImageSide = 8;

inline double clamp_unit(double v) {
  if (!(v > 0.0)) return 0.0;  // also maps NaN to 0
  return v < 1.0 ? v : 1.0;
}

/// Three-channel image with real pixel values in [0, 1].
///
/// Storage is planar: all of channel 0 row-major, then channel 1, then 2.
/// Every constructor clamps into [0, 1], so a live ImageBuffer can never
/// hold an out-of-range value. Buffers are immutable once built.
class ImageBuffer {
 public:
  ImageBuffer() = default;

  ImageBuffer(int height, int width, double fill = 0.0)
      : height_(height), width_(width) {
    check_size(height, width);
    data_.assign(static_cast<std::size_t>(kChannels) * height * width,
                 clamp_unit(fill));
  }

  ImageBuffer(int height, int width, std::vector<double> planes)
      : height_(height), width_(width), data_(std::move(planes)) {
    check_size(height, width);
    if (data_.size() != static_cast<std::size_t>(kChannels) * height * width)
      throw ShapeError("image data holds " + std::to_string(data_.size()) +
                       " values, expected 3*" + std::to_string(height) + "*" +
                       std::to_string(width));
    for (double& v : data_) v = clamp_unit(v);
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height_) * width_;
  }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double at(int c, int y, int x) const {
    return data_[c * plane_size() + static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<const double> channel(int c) const {
    return {data_.data() + c * plane_size(), plane_size()};
  }
  std::span<const double> values() const { return data_; }

  bool same_shape(const ImageBuffer& o) const {
    return height_ == o.height_ && width_ == o.width_;
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  static void check_size(int h, int w) {
    if (h < kMinImageSide || w < kMinImageSide)
      throw ShapeError("image must be at least 8x8, got " + std::to_string(h) +
                       "x" + std::to_string(w));
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

struct LabeledSample {
  ImageBuffer image;
  int label = 0;
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(std::string name, int class_count, std::vector<LabeledSample> samples)
      : name_(std::move(name)),
        class_count_(class_count),
        samples_(std::move(samples)) {
    if (class_count_ < 1) throw DomainError("dataset class count must be >= 1");
    if (samples_.empty()) throw DomainError("dataset '" + name_ + "' is empty");
    for (const auto& s : samples_)
      if (s.label < 0 || s.label >= class_count_)
        throw DomainError("label " + std::to_string(s.label) +
                          " outside [0, " + std::to_string(class_count_) +
                          ") in dataset '" + name_ + "'");
  }

  const std::string& name() const { return name_; }
  int class_count() const { return class_count_; }
  std::size_t size() const { return samples_.size(); }
  const LabeledSample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<LabeledSample>& samples() const { return samples_; }

 private:
  std::string name_;
  int class_count_ = 0;
  std::vector<LabeledSample> samples_;
};

/// Root mean squared difference over every channel and location.
inline double rmse(const ImageBuffer& a, const ImageBuffer& b) {
  if (!a.same_shape(b))
    throw ShapeError("rmse: " + std::to_string(a.height()) + "x" +
                     std::to_string(a.width()) + " vs " +
                     std::to_string(b.height()) + "x" +
                     std::to_string(b.width()));
  auto va = a.values();
  auto vb = b.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = va[i] - vb[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(va.size()));
}

// Luma used by the colour-aware corruptions (Rec. 601 weights).
inline std::vector<double> luminance(const ImageBuffer& img) {
  std::vector<double> out(img.plane_size());
  auto r = img.channel(0), g = img.channel(1), b = img.channel(2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
  return out;
}

}  // namespace acvc

#endif  // ACVC_IMAGE_HPP_
