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
#ifndef ACVC_IMAGE_OPS_HPP_
#define ACVC_IMAGE_OPS_HPP_

// Single-plane building blocks for the corruption kernels: filtering,
// resampling and procedural noise. Planes are unclamped; callers clamp when
// they assemble an ImageBuffer.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "acvc/image.hpp"
#include "acvc/random.hpp"

namespace acvc::ops {

struct Plane {
  int height = 0;
  int width = 0;
  std::vector<double> v;

  Plane() = default;
  Plane(int h, int w, double fill = 0.0)
      : height(h), width(w), v(static_cast<std::size_t>(h) * w, fill) {}

  double& operator()(int y, int x) { return v[static_cast<std::size_t>(y) * width + x]; }
  double operator()(int y, int x) const {
    return v[static_cast<std::size_t>(y) * width + x];
  }
};

using Planes = std::array<Plane, kChannels>;

inline Planes split(const ImageBuffer& img) {
  Planes out;
  for (int c = 0; c < kChannels; ++c) {
    auto ch = img.channel(c);
    out[c] = Plane(img.height(), img.width());
    std::copy(ch.begin(), ch.end(), out[c].v.begin());
  }
  return out;
}

inline ImageBuffer merge(const Planes& planes) {
  const int h = planes[0].height, w = planes[0].width;
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(kChannels) * h * w);
  for (const Plane& p : planes) data.insert(data.end(), p.v.begin(), p.v.end());
  return ImageBuffer(h, w, std::move(data));
}

// Half-sample symmetric reflection: -1 -> 0, n -> n-1.
inline int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

inline int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

inline std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[i + radius] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

inline Plane gaussian_blur(const Plane& in, double sigma) {
  if (sigma <= 0.0) return in;
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  Plane tmp(in.height, in.width), out(in.height, in.width);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * in(y, reflect(x + i, in.width));
      tmp(y, x) = acc;
    }
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp(reflect(y + i, in.height), x);
      out(y, x) = acc;
    }
  return out;
}

/// Dense 2D correlation with an odd-sized kernel and reflected borders.
inline Plane filter2d(const Plane& in, const Plane& kernel) {
  const int ry = kernel.height / 2, rx = kernel.width / 2;
  Plane out(in.height, in.width);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      double acc = 0.0;
      for (int ky = 0; ky < kernel.height; ++ky) {
        const int sy = reflect(y + ky - ry, in.height);
        for (int kx = 0; kx < kernel.width; ++kx) {
          const double w = kernel(ky, kx);
          if (w != 0.0) acc += w * in(sy, reflect(x + kx - rx, in.width));
        }
      }
      out(y, x) = acc;
    }
  return out;
}

/// Bilinear sample at a fractional position; borders are reflected.
inline double sample_bilinear(const Plane& p, double y, double x) {
  const double fy = std::floor(y), fx = std::floor(x);
  const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
  const double ty = y - fy, tx = x - fx;
  const int ya = reflect(y0, p.height), yb = reflect(y0 + 1, p.height);
  const int xa = reflect(x0, p.width), xb = reflect(x0 + 1, p.width);
  return (1 - ty) * ((1 - tx) * p(ya, xa) + tx * p(ya, xb)) +
         ty * ((1 - tx) * p(yb, xa) + tx * p(yb, xb));
}

/// Magnifies around the image centre by `zoom` (>= 1), same output size.
inline Plane center_zoom(const Plane& in, double zoom) {
  Plane out(in.height, in.width);
  const double cy = (in.height - 1) / 2.0, cx = (in.width - 1) / 2.0;
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x)
      out(y, x) = sample_bilinear(in, cy + (y - cy) / zoom, cx + (x - cx) / zoom);
  return out;
}

/// Area-average downsampling to (h, w); each output pixel averages the
/// input area it covers, with fractional edge weights.
inline Plane resize_area(const Plane& in, int h, int w) {
  Plane out(h, w);
  const double sy = static_cast<double>(in.height) / h;
  const double sx = static_cast<double>(in.width) / w;
  for (int oy = 0; oy < h; ++oy) {
    const double y0 = oy * sy, y1 = (oy + 1) * sy;
    for (int ox = 0; ox < w; ++ox) {
      const double x0 = ox * sx, x1 = (ox + 1) * sx;
      double acc = 0.0, area = 0.0;
      for (int iy = static_cast<int>(std::floor(y0)); iy < static_cast<int>(std::ceil(y1)); ++iy) {
        const double wy = std::min<double>(iy + 1, y1) - std::max<double>(iy, y0);
        for (int ix = static_cast<int>(std::floor(x0)); ix < static_cast<int>(std::ceil(x1)); ++ix) {
          const double wx = std::min<double>(ix + 1, x1) - std::max<double>(ix, x0);
          acc += wy * wx * in(std::min(iy, in.height - 1), std::min(ix, in.width - 1));
          area += wy * wx;
        }
      }
      out(oy, ox) = acc / area;
    }
  }
  return out;
}

inline Plane resize_nearest(const Plane& in, int h, int w) {
  Plane out(h, w);
  for (int y = 0; y < h; ++y) {
    const int sy = std::min(in.height - 1, static_cast<int>((y + 0.5) * in.height / h));
    for (int x = 0; x < w; ++x) {
      const int sx = std::min(in.width - 1, static_cast<int>((x + 0.5) * in.width / w));
      out(y, x) = in(sy, sx);
    }
  }
  return out;
}

/// Averages `length` copies shifted along `angle` (radians), weighted by a
/// half-Gaussian in the shift distance.
inline Plane directional_blur(const Plane& in, int length, double sigma, double angle) {
  std::vector<double> weights(static_cast<std::size_t>(std::max(1, length)));
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    sum += weights[i];
  }
  const double dy = std::sin(angle), dx = std::cos(angle);
  Plane out(in.height, in.width);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i)
        acc += weights[i] * sample_bilinear(in, y - dy * static_cast<double>(i),
                                            x - dx * static_cast<double>(i));
      out(y, x) = acc / sum;
    }
  return out;
}

/// Diamond-square plasma fractal on a square power-of-two grid covering
/// (h, w), cropped and min-max normalised to [0, 1]. Larger `decay` makes
/// the field smoother.
inline Plane plasma_fractal(Rng& rng, int h, int w, double decay) {
  int size = 1;
  while (size < std::max(h, w)) size *= 2;
  Plane grid(size, size);
  auto at = [&](int y, int x) -> double& {
    return grid((y % size + size) % size, (x % size + size) % size);
  };
  double wibble = 1.0;
  for (int step = size; step >= 2; step /= 2) {
    const int half = step / 2;
    // Square step: centres of each step x step cell.
    for (int y = 0; y < size; y += step)
      for (int x = 0; x < size; x += step) {
        const double mean =
            (at(y, x) + at(y, x + step) + at(y + step, x) + at(y + step, x + step)) / 4;
        at(y + half, x + half) = mean + wibble * uniform(rng, -1.0, 1.0);
      }
    // Diamond step: edge midpoints from their four toroidal neighbours.
    for (int y = 0; y < size; y += half)
      for (int x = ((y / half) % 2 == 0) ? half : 0; x < size; x += step) {
        const double mean =
            (at(y - half, x) + at(y + half, x) + at(y, x - half) + at(y, x + half)) / 4;
        at(y, x) = mean + wibble * uniform(rng, -1.0, 1.0);
      }
    wibble /= decay;
  }
  Plane out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out(y, x) = grid(y, x);
  const auto [lo, hi] = std::minmax_element(out.v.begin(), out.v.end());
  const double min = *lo, range = *hi - *lo;
  for (double& v : out.v) v = range > 0 ? (v - min) / range : 0.0;
  return out;
}

inline Plane normal_field(Rng& rng, int h, int w, double mean, double stddev) {
  Plane out(h, w);
  for (double& v : out.v) v = mean + stddev * standard_normal(rng);
  return out;
}

inline void standardize(Plane& p) {
  double mean = 0.0;
  for (double v : p.v) mean += v;
  mean /= static_cast<double>(p.v.size());
  double var = 0.0;
  for (double v : p.v) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(p.v.size()));
  for (double& v : p.v) v = sd > 0 ? (v - mean) / sd : 0.0;
}

}  // namespace acvc::ops

#endif  // ACVC_IMAGE_OPS_HPP_
