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
#ifndef ACVC_PHOTOMETRIC_HPP_
#define ACVC_PHOTOMETRIC_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "acvc/corruption_kind.hpp"
#include "acvc/errors.hpp"
#include "acvc/image.hpp"
#include "acvc/image_io.hpp"
#include "acvc/image_ops.hpp"
#include "acvc/random.hpp"
#include "acvc/severity_table.hpp"

namespace acvc {

inline const SeverityTable& builtin_severity_table() {
  static const SeverityTable table = default_severity_table();
  return table;
}

namespace photometric {

using ops::Plane;
using ops::Planes;

template <typename F>
ImageBuffer per_channel(const ImageBuffer& img, F&& f) {
  Planes planes = ops::split(img);
  for (Plane& p : planes) p = f(p);
  return ops::merge(planes);
}

template <typename F>
ImageBuffer per_value(const ImageBuffer& img, F&& f) {
  std::vector<double> data(img.values().begin(), img.values().end());
  for (double& v : data) v = f(v);
  return ImageBuffer(img.height(), img.width(), std::move(data));
}

// --- Weather ---------------------------------------------------------------

inline ImageBuffer fog(const ImageBuffer& img, double intensity, double decay, Rng& rng) {
  const Plane haze = ops::plasma_fractal(rng, img.height(), img.width(), decay);
  const double max_v = *std::max_element(img.values().begin(), img.values().end());
  const double scale = max_v / (max_v + intensity);
  Planes planes = ops::split(img);
  for (Plane& p : planes)
    for (std::size_t i = 0; i < p.v.size(); ++i)
      p.v[i] = (p.v[i] + intensity * haze.v[i]) * scale;
  return ops::merge(planes);
}

inline ImageBuffer snow(const ImageBuffer& img, double loc, double scale, double zoom,
                        double threshold, int length, double blend, Rng& rng) {
  const int h = img.height(), w = img.width();
  Plane flakes = ops::normal_field(rng, h, w, loc, scale);
  flakes = ops::center_zoom(flakes, zoom);
  for (double& v : flakes.v) v = v < threshold ? 0.0 : v;
  // Falling direction, mostly downward.
  const double angle = uniform(rng, 0.25, 0.75) * std::numbers::pi;
  flakes = ops::directional_blur(flakes, length, length / 2.0, angle);
  for (double& v : flakes.v) v = std::clamp(v, 0.0, 1.0);

  const std::vector<double> gray = luminance(img);
  Planes planes = ops::split(img);
  const std::size_t n = img.plane_size();
  for (Plane& p : planes)
    for (std::size_t i = 0; i < n; ++i) {
      const double lifted = std::max(p.v[i], gray[i] * 1.5 + 0.5);
      p.v[i] = blend * p.v[i] + (1.0 - blend) * lifted + flakes.v[i] + flakes.v[n - 1 - i];
    }
  return ops::merge(planes);
}

// Procedural frost: a soft fractal haze plus ridged-noise streaks.
inline ImageBuffer frost(const ImageBuffer& img, double image_weight, double frost_weight,
                         Rng& rng) {
  const int h = img.height(), w = img.width();
  const Plane haze = ops::plasma_fractal(rng, h, w, 1.6);
  const Plane veins = ops::plasma_fractal(rng, h, w, 1.3);
  constexpr std::array<double, 3> tint{0.85, 0.92, 1.0};
  Planes planes = ops::split(img);
  for (std::size_t i = 0; i < img.plane_size(); ++i) {
    const double ridge = 1.0 - std::abs(2.0 * veins.v[i] - 1.0);
    const double streak = std::clamp((ridge - 0.7) / 0.3, 0.0, 1.0);
    const double texture = std::clamp(0.6 * haze.v[i] + 0.8 * streak, 0.0, 1.0);
    for (int c = 0; c < kChannels; ++c)
      planes[c].v[i] = image_weight * planes[c].v[i] + frost_weight * tint[c] * texture;
  }
  return ops::merge(planes);
}

inline ImageBuffer spatter(const ImageBuffer& img, double sigma, double threshold,
                           double intensity, bool mud, Rng& rng) {
  Plane liquid = ops::normal_field(rng, img.height(), img.width(), 0.0, 1.0);
  liquid = ops::gaussian_blur(liquid, sigma);
  ops::standardize(liquid);
  constexpr std::array<double, 3> water{0.75, 0.85, 0.95};
  constexpr std::array<double, 3> dirt{0.40, 0.27, 0.13};
  const auto& colour = mud ? dirt : water;
  Planes planes = ops::split(img);
  for (std::size_t i = 0; i < img.plane_size(); ++i) {
    const double mask = intensity * std::clamp((liquid.v[i] - threshold) / 0.25, 0.0, 1.0);
    for (int c = 0; c < kChannels; ++c)
      planes[c].v[i] = planes[c].v[i] * (1.0 - mask) + colour[c] * mask;
  }
  return ops::merge(planes);
}

// --- Blur --------------------------------------------------------------------

inline ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma) {
  return per_channel(img, [&](const Plane& p) { return ops::gaussian_blur(p, sigma); });
}

// Blur, locally shuffle pixels, blur again.
inline ImageBuffer glass_blur(const ImageBuffer& img, double sigma, int max_delta,
                              int iterations, Rng& rng) {
  Planes planes = ops::split(img);
  for (Plane& p : planes) p = ops::gaussian_blur(p, sigma);
  const int h = img.height(), w = img.width();
  const auto span = static_cast<std::uint64_t>(2 * max_delta + 1);
  for (int it = 0; it < iterations; ++it)
    for (int y = h - 1 - max_delta; y >= max_delta; --y)
      for (int x = w - 1 - max_delta; x >= max_delta; --x) {
        const int dx = static_cast<int>(uniform_index(rng, span)) - max_delta;
        const int dy = static_cast<int>(uniform_index(rng, span)) - max_delta;
        for (Plane& p : planes) std::swap(p(y, x), p(y + dy, x + dx));
      }
  for (Plane& p : planes) p = ops::gaussian_blur(p, sigma);
  return ops::merge(planes);
}

inline ImageBuffer motion_blur(const ImageBuffer& img, int length, double sigma, Rng& rng) {
  const double angle = uniform(rng, -0.25, 0.25) * std::numbers::pi;
  return per_channel(img, [&](const Plane& p) {
    return ops::directional_blur(p, length, sigma, angle);
  });
}

inline Plane defocus_kernel(double radius, double alias_sigma) {
  const int r = static_cast<int>(std::ceil(radius)) + 1;
  Plane k(2 * r + 1, 2 * r + 1);
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x)
      k(y + r, x + r) = (x * x + y * y <= radius * radius) ? 1.0 : 0.0;
  k = ops::gaussian_blur(k, alias_sigma);
  double sum = 0.0;
  for (double v : k.v) sum += v;
  for (double& v : k.v) v /= sum;
  return k;
}

inline ImageBuffer defocus_blur(const ImageBuffer& img, double radius, double alias_sigma) {
  const Plane kernel = defocus_kernel(radius, alias_sigma);
  return per_channel(img, [&](const Plane& p) { return ops::filter2d(p, kernel); });
}

// Mean of the input and `copies` centre zooms up to max_zoom.
inline ImageBuffer zoom_blur(const ImageBuffer& img, double max_zoom, int copies) {
  return per_channel(img, [&](const Plane& p) {
    Plane acc = p;
    for (int i = 1; i <= copies; ++i) {
      const Plane z = ops::center_zoom(p, 1.0 + (max_zoom - 1.0) * i / copies);
      for (std::size_t j = 0; j < acc.v.size(); ++j) acc.v[j] += z.v[j];
    }
    for (double& v : acc.v) v /= copies + 1;
    return acc;
  });
}

// --- Noise -------------------------------------------------------------------

inline ImageBuffer shot_noise(const ImageBuffer& img, double photons, Rng& rng) {
  return per_value(img, [&](double v) { return poisson(rng, v * photons) / photons; });
}

inline ImageBuffer impulse_noise(const ImageBuffer& img, double amount, Rng& rng) {
  return per_value(img, [&](double v) {
    if (uniform01(rng) >= amount) return v;
    return uniform01(rng) < 0.5 ? 0.0 : 1.0;
  });
}

inline ImageBuffer gaussian_noise(const ImageBuffer& img, double sigma, Rng& rng) {
  return per_value(img, [&](double v) { return v + sigma * standard_normal(rng); });
}

inline ImageBuffer speckle_noise(const ImageBuffer& img, double sigma, Rng& rng) {
  return per_value(img, [&](double v) { return v + v * sigma * standard_normal(rng); });
}

// --- Digital -----------------------------------------------------------------

inline ImageBuffer pixelate(const ImageBuffer& img, double factor) {
  const int h = std::max(1, static_cast<int>(std::lround(img.height() * factor)));
  const int w = std::max(1, static_cast<int>(std::lround(img.width() * factor)));
  return per_channel(img, [&](const Plane& p) {
    return ops::resize_nearest(ops::resize_area(p, h, w), p.height, p.width);
  });
}

// Smooth random displacement field with peak magnitude `alpha` pixels.
inline ImageBuffer elastic(const ImageBuffer& img, double alpha, double sigma, Rng& rng) {
  const int h = img.height(), w = img.width();
  auto field = [&] {
    Plane f(h, w);
    for (double& v : f.v) v = uniform(rng, -1.0, 1.0);
    return ops::gaussian_blur(f, sigma);
  };
  Plane dx = field(), dy = field();
  double peak = 1e-12;
  for (std::size_t i = 0; i < dx.v.size(); ++i)
    peak = std::max({peak, std::abs(dx.v[i]), std::abs(dy.v[i])});
  const double s = alpha / peak;
  return per_channel(img, [&](const Plane& p) {
    Plane out(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        out(y, x) = ops::sample_bilinear(p, y + s * dy(y, x), x + s * dx(y, x));
    return out;
  });
}

inline ImageBuffer saturate(const ImageBuffer& img, double factor) {
  const std::vector<double> gray = luminance(img);
  Planes planes = ops::split(img);
  for (Plane& p : planes)
    for (std::size_t i = 0; i < p.v.size(); ++i)
      p.v[i] = gray[i] + factor * (p.v[i] - gray[i]);
  return ops::merge(planes);
}

inline ImageBuffer brightness(const ImageBuffer& img, double delta) {
  return per_value(img, [&](double v) { return v + delta; });
}

// Pulls every value toward mid-gray: 0.5 + factor * (v - 0.5).
inline ImageBuffer contrast(const ImageBuffer& img, double factor) {
  return per_value(img, [&](double v) { return 0.5 + factor * (v - 0.5); });
}

}  // namespace photometric

/// Applies one of the 19 non-Fourier corruptions. Deterministic kinds ignore
/// `rng`; stochastic kinds consume it.
inline ImageBuffer apply_photometric(CorruptionKind kind, int level, const ImageBuffer& img,
                                     Rng& rng,
                                     const SeverityTable& table = builtin_severity_table()) {
  if (is_fourier(kind))
    throw RoutingError("'" + std::string(name_of(kind)) +
                       "' is a Fourier corruption; use the fourier module");
  check_level(level);
  auto p = [&](std::string_view name) { return table.param(kind, level, name); };
  auto pi = [&](std::string_view name) { return static_cast<int>(std::lround(p(name))); };
  namespace ph = photometric;
  using K = CorruptionKind;
  switch (kind) {
    case K::fog: return ph::fog(img, p("intensity"), p("decay"), rng);
    case K::snow:
      return ph::snow(img, p("loc"), p("scale"), p("zoom"), p("threshold"), pi("length"),
                      p("blend"), rng);
    case K::frost: return ph::frost(img, p("image_weight"), p("frost_weight"), rng);
    case K::spatter:
      return ph::spatter(img, p("sigma"), p("threshold"), p("intensity"), p("mud") != 0.0,
                         rng);
    case K::gaussian_blur: return ph::gaussian_blur(img, p("sigma"));
    case K::glass_blur:
      return ph::glass_blur(img, p("sigma"), pi("max_delta"), pi("iterations"), rng);
    case K::motion_blur: return ph::motion_blur(img, pi("length"), p("sigma"), rng);
    case K::defocus_blur: return ph::defocus_blur(img, p("radius"), p("alias_sigma"));
    case K::zoom_blur: return ph::zoom_blur(img, p("max_zoom"), pi("copies"));
    case K::shot_noise: return ph::shot_noise(img, p("photons"), rng);
    case K::impulse_noise: return ph::impulse_noise(img, p("amount"), rng);
    case K::gaussian_noise: return ph::gaussian_noise(img, p("sigma"), rng);
    case K::speckle_noise: return ph::speckle_noise(img, p("sigma"), rng);
    case K::jpeg_compression: return jpeg_roundtrip(img, pi("quality"));
    case K::pixelate: return ph::pixelate(img, p("factor"));
    case K::elastic: return ph::elastic(img, p("alpha"), p("sigma"), rng);
    case K::saturate: return ph::saturate(img, p("factor"));
    case K::brightness: return ph::brightness(img, p("delta"));
    case K::contrast: return ph::contrast(img, p("factor"));
    default: break;
  }
  throw RoutingError("unhandled corruption kind");
}

}  // namespace acvc

#endif  // ACVC_PHOTOMETRIC_HPP_
