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
#ifndef ACVC_BENCHMARK_HPP_
#define ACVC_BENCHMARK_HPP_

// Synthetic single-source domain-shift benchmark.
//
// Three shape classes (disk, triangle, cross) rendered at 32x32:
//   source   filled shape in a jittered colour over a two-colour textured
//            background (stripes, checks or fractal blotches)
//   outline  dark contour of the shape on plain light paper, no fill
//   inverted a source-style rendering with every value replaced by 1 - v
// Labels cycle 0,1,2 so every split is exactly balanced. Each image is a
// pure function of (benchmark seed, split, index).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "acvc/image.hpp"
#include "acvc/image_ops.hpp"
#include "acvc/random.hpp"

namespace acvc {

enum class ShapeClass { disk = 0, triangle = 1, cross = 2 };
inline constexpr int kShapeClassCount = 3;
inline constexpr int kBenchmarkSide = 32;

struct BenchmarkSizes {
  int train = 1500;
  int source_val = 300;
  int target_test = 300;
};

struct SyntheticDGBench {
  Dataset train;
  Dataset source_val;
  Dataset target_outline;
  Dataset target_inverted;

  std::vector<const Dataset*> targets() const { return {&target_outline, &target_inverted}; }
};

namespace bench_detail {

struct ShapeGeometry {
  ShapeClass shape = ShapeClass::disk;
  double cx = 16, cy = 16;
  double radius = 9;
  double angle = 0;
  double cos_a = 1, sin_a = 0;

  // True when (x, y) lies inside the shape shrunk inward by `inset` pixels.
  bool contains(double x, double y, double inset = 0.0) const {
    const double dx = x - cx, dy = y - cy;
    const double u = cos_a * dx + sin_a * dy, v = -sin_a * dx + cos_a * dy;
    switch (shape) {
      case ShapeClass::disk: return std::hypot(u, v) <= radius - inset;
      case ShapeClass::triangle: {
        // Equilateral, circumradius `radius`: each edge sits at radius/2.
        for (int k = 0; k < 3; ++k) {
          const double a = k * 2.0 * std::numbers::pi / 3.0 + std::numbers::pi / 2.0;
          const double dist = radius / 2.0 - (u * -std::cos(a) + v * -std::sin(a));
          if (dist < inset) return false;
        }
        return true;
      }
      case ShapeClass::cross: {
        const double arm = radius, half_width = 0.33 * radius;
        const double au = std::abs(u), av = std::abs(v);
        return (au <= arm - inset && av <= half_width - inset) ||
               (av <= arm - inset && au <= half_width - inset);
      }
    }
    return false;
  }
};

inline ShapeGeometry random_geometry(ShapeClass shape, Rng& rng) {
  ShapeGeometry g;
  g.shape = shape;
  g.radius = uniform(rng, 8.0, 12.0);
  const double margin = g.radius * 0.9 + 1.0;
  g.cx = uniform(rng, margin, kBenchmarkSide - margin);
  g.cy = uniform(rng, margin, kBenchmarkSide - margin);
  g.angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  g.cos_a = std::cos(g.angle);
  g.sin_a = std::sin(g.angle);
  return g;
}

// 4x4 supersampled coverage of the shape (or of a ring when stroke > 0).
inline ops::Plane coverage(const ShapeGeometry& g, double stroke = 0.0) {
  ops::Plane out(kBenchmarkSide, kBenchmarkSide);
  for (int y = 0; y < kBenchmarkSide; ++y)
    for (int x = 0; x < kBenchmarkSide; ++x) {
      int hits = 0;
      for (int sy = 0; sy < 4; ++sy)
        for (int sx = 0; sx < 4; ++sx) {
          const double px = x + (sx + 0.5) / 4.0, py = y + (sy + 0.5) / 4.0;
          const bool in = g.contains(px, py);
          if (stroke > 0.0 ? (in && !g.contains(px, py, stroke)) : in) ++hits;
        }
      out(y, x) = hits / 16.0;
    }
  return out;
}

using Rgb = std::array<double, 3>;

inline Rgb random_colour(Rng& rng) {
  return {uniform01(rng), uniform01(rng), uniform01(rng)};
}

inline double mean_of(const Rgb& c) { return (c[0] + c[1] + c[2]) / 3.0; }

inline ops::Plane background_pattern(Rng& rng) {
  ops::Plane p(kBenchmarkSide, kBenchmarkSide);
  switch (uniform_index(rng, 3)) {
    case 0: {  // stripes
      const double angle = uniform(rng, 0.0, std::numbers::pi);
      const double freq = uniform(rng, 0.25, 0.9);
      const double phase0 = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      for (int y = 0; y < kBenchmarkSide; ++y)
        for (int x = 0; x < kBenchmarkSide; ++x)
          p(y, x) = 0.5 + 0.5 * std::sin(freq * (x * std::cos(angle) + y * std::sin(angle)) + phase0);
      break;
    }
    case 1: {  // checks
      const int cell = 2 + static_cast<int>(uniform_index(rng, 5));
      const int ox = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(cell)));
      const int oy = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(cell)));
      for (int y = 0; y < kBenchmarkSide; ++y)
        for (int x = 0; x < kBenchmarkSide; ++x)
          p(y, x) = (((x + ox) / cell + (y + oy) / cell) % 2) ? 1.0 : 0.0;
      break;
    }
    default:  // fractal blotches
      p = ops::plasma_fractal(rng, kBenchmarkSide, kBenchmarkSide, uniform(rng, 1.5, 2.5));
      break;
  }
  return p;
}

inline ImageBuffer compose(const ops::Plane& alpha, const ops::Plane& pattern,
                           const Rgb& bg_a, const Rgb& bg_b, const Rgb& fg, Rng& rng) {
  ops::Planes planes;
  for (int c = 0; c < kChannels; ++c) {
    planes[c] = ops::Plane(kBenchmarkSide, kBenchmarkSide);
    for (std::size_t i = 0; i < planes[c].v.size(); ++i) {
      const double bg = bg_a[c] + (bg_b[c] - bg_a[c]) * pattern.v[i];
      const double fill = fg[c] + 0.04 * standard_normal(rng);
      planes[c].v[i] = bg * (1.0 - alpha.v[i]) + fill * alpha.v[i];
    }
  }
  return ops::merge(planes);
}

inline ImageBuffer render_source(ShapeClass shape, Rng& rng) {
  const ShapeGeometry g = random_geometry(shape, rng);
  const ops::Plane alpha = coverage(g);
  const ops::Plane pattern = background_pattern(rng);
  // Low-contrast two-tone background around a random base colour.
  const Rgb bg_a = random_colour(rng);
  Rgb bg_b;
  for (int c = 0; c < kChannels; ++c)
    bg_b[c] = std::clamp(bg_a[c] + uniform(rng, -0.2, 0.2), 0.0, 1.0);
  // The fill is kept clearly brighter or darker than the background.
  const double bg_mean = 0.5 * (mean_of(bg_a) + mean_of(bg_b));
  Rgb fg = random_colour(rng);
  for (int tries = 0; tries < 64 && std::abs(mean_of(fg) - bg_mean) < 0.3; ++tries)
    fg = random_colour(rng);
  return compose(alpha, pattern, bg_a, bg_b, fg, rng);
}

inline ImageBuffer render_outline(ShapeClass shape, Rng& rng) {
  const ShapeGeometry g = random_geometry(shape, rng);
  const ops::Plane ink = coverage(g, uniform(rng, 1.2, 2.0));
  const double paper = uniform(rng, 0.85, 1.0);
  const double pen = uniform(rng, 0.0, 0.3);
  ops::Plane flat(kBenchmarkSide, kBenchmarkSide, 0.0);
  return compose(ink, flat, {paper, paper, paper}, {paper, paper, paper}, {pen, pen, pen}, rng);
}

inline ImageBuffer invert(const ImageBuffer& img) {
  std::vector<double> data(img.values().begin(), img.values().end());
  for (double& v : data) v = 1.0 - v;
  return ImageBuffer(img.height(), img.width(), std::move(data));
}

enum class Split : std::uint64_t { train = 1, source_val = 2, outline = 3, inverted = 4 };

inline Dataset render_split(std::uint64_t seed, Split split, int count, const std::string& name) {
  const SeedPolicy policy{seed};
  std::vector<LabeledSample> samples;
  samples.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng = policy.stream(static_cast<std::uint64_t>(split), static_cast<std::uint64_t>(i));
    const int label = i % kShapeClassCount;
    const auto shape = static_cast<ShapeClass>(label);
    ImageBuffer img = split == Split::outline    ? render_outline(shape, rng)
                      : split == Split::inverted ? invert(render_source(shape, rng))
                                                 : render_source(shape, rng);
    samples.push_back({std::move(img), label});
  }
  return Dataset(name, kShapeClassCount, std::move(samples));
}

}  // namespace bench_detail

/// Builds every split of the benchmark. Split sizes must be multiples of 3
/// for exact class balance.
inline SyntheticDGBench make_benchmark(std::uint64_t seed, BenchmarkSizes sizes = {}) {
  using bench_detail::render_split;
  using bench_detail::Split;
  for (int n : {sizes.train, sizes.source_val, sizes.target_test})
    if (n < kShapeClassCount || n % kShapeClassCount != 0)
      throw DomainError("benchmark split sizes must be positive multiples of 3");
  return {render_split(seed, Split::train, sizes.train, "source_train"),
          render_split(seed, Split::source_val, sizes.source_val, "source_val"),
          render_split(seed, Split::outline, sizes.target_test, "target_outline"),
          render_split(seed, Split::inverted, sizes.target_test, "target_inverted")};
}

}  // namespace acvc

#endif  // ACVC_BENCHMARK_HPP_
