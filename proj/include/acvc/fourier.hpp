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
#ifndef ACVC_FOURIER_HPP_
#define ACVC_FOURIER_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "acvc/errors.hpp"
#include "acvc/image.hpp"

namespace acvc {

using Complex = std::complex<double>;
using ComplexPlane = std::vector<Complex>;

// ---------------------------------------------------------------------------
// Plane-level transforms. These accept any size >= 1 so that tiny oracle
// cases (4x4 and smaller) can be checked without an ImageBuffer.
// ---------------------------------------------------------------------------

/// Separable 2D DFT of a row-major height x width plane. The inverse
/// includes the 1/(height*width) normalisation.
inline ComplexPlane dft2(std::span<const Complex> plane, int height, int width,
                         bool inverse = false) {
  if (height < 1 || width < 1 ||
      plane.size() != static_cast<std::size_t>(height) * width)
    throw ShapeError("dft2: plane size does not match " +
                     std::to_string(height) + "x" + std::to_string(width));
  Eigen::FFT<double> fft;
  ComplexPlane out(plane.begin(), plane.end());
  std::vector<Complex> src, dst;

  // A length-1 transform is the identity (and trips up the FFT backend).
  src.resize(width);
  for (int y = 0; y < height && width > 1; ++y) {
    std::copy_n(out.begin() + static_cast<std::ptrdiff_t>(y) * width, width,
                src.begin());
    if (inverse)
      fft.inv(dst, src);
    else
      fft.fwd(dst, src);
    std::copy(dst.begin(), dst.end(),
              out.begin() + static_cast<std::ptrdiff_t>(y) * width);
  }
  src.resize(height);
  for (int x = 0; x < width && height > 1; ++x) {
    for (int y = 0; y < height; ++y) src[y] = out[static_cast<std::size_t>(y) * width + x];
    if (inverse)
      fft.inv(dst, src);
    else
      fft.fwd(dst, src);
    for (int y = 0; y < height; ++y) out[static_cast<std::size_t>(y) * width + x] = dst[y];
  }
  return out;
}

// Moves the zero frequency to index (height/2, width/2), or back.
inline ComplexPlane shift_plane(std::span<const Complex> plane, int height,
                                int width, bool to_center) {
  ComplexPlane out(plane.size());
  const int sy = to_center ? height / 2 : height - height / 2;
  const int sx = to_center ? width / 2 : width - width / 2;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out[static_cast<std::size_t>((y + sy) % height) * width + (x + sx) % width] =
          plane[static_cast<std::size_t>(y) * width + x];
  return out;
}

// ---------------------------------------------------------------------------
// Spectrum
// ---------------------------------------------------------------------------

enum class SpectrumLayout { natural, centered };

/// Per-channel complex spectrum of an image.
struct Spectrum {
  int height = 0;
  int width = 0;
  SpectrumLayout layout = SpectrumLayout::natural;
  std::array<ComplexPlane, kChannels> planes;

  const Complex& at(int c, int u, int v) const {
    return planes[c][static_cast<std::size_t>(u) * width + v];
  }
};

inline Spectrum forward_dft(const ImageBuffer& img) {
  Spectrum spec{img.height(), img.width(), SpectrumLayout::natural, {}};
  for (int c = 0; c < kChannels; ++c) {
    auto ch = img.channel(c);
    ComplexPlane plane(ch.begin(), ch.end());
    spec.planes[c] = dft2(plane, img.height(), img.width());
  }
  return spec;
}

inline Spectrum with_layout(const Spectrum& spec, SpectrumLayout layout) {
  if (spec.layout == layout) return spec;
  Spectrum out{spec.height, spec.width, layout, {}};
  const bool to_center = layout == SpectrumLayout::centered;
  for (int c = 0; c < kChannels; ++c)
    out.planes[c] = shift_plane(spec.planes[c], spec.height, spec.width, to_center);
  return out;
}

/// Complex inverse transform before any clamping; used to inspect the
/// imaginary residue and by the pre-clamp oracle tests.
inline std::array<ComplexPlane, kChannels> inverse_dft_raw(const Spectrum& spec) {
  const Spectrum nat = with_layout(spec, SpectrumLayout::natural);
  std::array<ComplexPlane, kChannels> out;
  for (int c = 0; c < kChannels; ++c)
    out[c] = dft2(nat.planes[c], nat.height, nat.width, /*inverse=*/true);
  return out;
}

inline std::vector<double> real_planes(const std::array<ComplexPlane, kChannels>& raw) {
  std::vector<double> out;
  out.reserve(raw[0].size() * kChannels);
  for (const auto& plane : raw)
    for (const Complex& z : plane) out.push_back(z.real());
  return out;
}

/// Real part of the inverse transform, clamped to [0, 1].
inline ImageBuffer inverse_dft(const Spectrum& spec) {
  return ImageBuffer(spec.height, spec.width, real_planes(inverse_dft_raw(spec)));
}

inline std::array<std::vector<double>, kChannels> amplitude(const Spectrum& spec) {
  std::array<std::vector<double>, kChannels> out;
  for (int c = 0; c < kChannels; ++c) {
    out[c].reserve(spec.planes[c].size());
    for (const Complex& z : spec.planes[c]) out[c].push_back(std::abs(z));
  }
  return out;
}

// atan2(imaginary, real), in (-pi, pi].
inline std::array<std::vector<double>, kChannels> phase(const Spectrum& spec) {
  std::array<std::vector<double>, kChannels> out;
  for (int c = 0; c < kChannels; ++c) {
    out[c].reserve(spec.planes[c].size());
    for (const Complex& z : spec.planes[c]) out[c].push_back(std::arg(z));
  }
  return out;
}

inline Spectrum from_polar(int height, int width, SpectrumLayout layout,
                           const std::array<std::vector<double>, kChannels>& amp,
                           const std::array<std::vector<double>, kChannels>& ph) {
  Spectrum out{height, width, layout, {}};
  for (int c = 0; c < kChannels; ++c) {
    out.planes[c].resize(amp[c].size());
    for (std::size_t i = 0; i < amp[c].size(); ++i)
      out.planes[c][i] = std::polar(amp[c][i], ph[c][i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Severity tables for the Fourier corruptions.
// ---------------------------------------------------------------------------

struct FourierSeverity {
  int level = 1;
  double alpha = 1.0;       // phase scale
  double beta = 1.0;        // constant amplitude
  double d_fraction = 0.0;  // high-pass radius as a fraction of min(H, W)
};

inline constexpr std::array<double, 5> kPhaseScaleAlpha{0.9, 0.8, 0.7, 0.6, 0.5};
inline constexpr std::array<double, 5> kConstantAmplitudeBeta{0.95, 0.9, 0.85, 0.8, 0.75};
inline constexpr std::array<double, 5> kHighPassFraction{0.01, 0.02, 0.03, 0.04, 0.05};

inline void check_level(int level) {
  if (level < 1 || level > 5)
    throw DomainError("severity level must be in 1..5, got " + std::to_string(level));
}

inline FourierSeverity fourier_severity(int level) {
  check_level(level);
  const auto i = static_cast<std::size_t>(level - 1);
  return {level, kPhaseScaleAlpha[i], kConstantAmplitudeBeta[i], kHighPassFraction[i]};
}

inline double high_pass_radius(int height, int width, int level) {
  return fourier_severity(level).d_fraction * std::min(height, width);
}

// ---------------------------------------------------------------------------
// Spectrum-level corruption steps
// ---------------------------------------------------------------------------

inline Spectrum scale_phase(const Spectrum& spec, double alpha) {
  auto ph = phase(spec);
  for (auto& plane : ph)
    for (double& p : plane) p *= alpha;
  return from_polar(spec.height, spec.width, spec.layout, amplitude(spec), ph);
}

inline Spectrum flatten_amplitude(const Spectrum& spec, double beta) {
  std::array<std::vector<double>, kChannels> amp;
  for (int c = 0; c < kChannels; ++c) amp[c].assign(spec.planes[c].size(), beta);
  return from_polar(spec.height, spec.width, spec.layout, amp, phase(spec));
}

struct HighPassResult {
  Spectrum spectrum;  // same layout as the input
  std::size_t removed_per_channel = 0;
};

/// Zeroes every coefficient closer than `radius` to the centre of the
/// centred spectrum.
inline HighPassResult high_pass_filter(const Spectrum& spec, double radius) {
  Spectrum centred = with_layout(spec, SpectrumLayout::centered);
  const double cy = spec.height / 2;
  const double cx = spec.width / 2;
  std::size_t removed = 0;
  for (int u = 0; u < spec.height; ++u)
    for (int v = 0; v < spec.width; ++v) {
      const double dist = std::hypot(u - cy, v - cx);
      if (dist < radius) {
        ++removed;
        for (auto& plane : centred.planes)
          plane[static_cast<std::size_t>(u) * spec.width + v] = Complex{};
      }
    }
  return {with_layout(centred, spec.layout), removed};
}

// Per-channel min-max rescale to [0, 1]. A constant channel is clamped
// instead.
inline ImageBuffer renormalize_channels(int height, int width, std::vector<double> planes) {
  const std::size_t n = static_cast<std::size_t>(height) * width;
  for (int c = 0; c < kChannels; ++c) {
    auto first = planes.begin() + static_cast<std::ptrdiff_t>(c * n);
    auto last = first + static_cast<std::ptrdiff_t>(n);
    const auto [lo, hi] = std::minmax_element(first, last);
    const double min = *lo, range = *hi - *lo;
    if (range <= 1e-12) continue;  // clamped by the ImageBuffer constructor
    for (auto it = first; it != last; ++it) *it = (*it - min) / range;
  }
  return ImageBuffer(height, width, std::move(planes));
}

// ---------------------------------------------------------------------------
// Image-level corruptions
// ---------------------------------------------------------------------------

inline ImageBuffer phase_scaling_alpha(const ImageBuffer& img, double alpha) {
  return inverse_dft(scale_phase(forward_dft(img), alpha));
}

/// Keeps the amplitude and multiplies the phase by alpha(level).
inline ImageBuffer phase_scaling(const ImageBuffer& img, int level) {
  return phase_scaling_alpha(img, fourier_severity(level).alpha);
}

inline ImageBuffer constant_amplitude_beta(const ImageBuffer& img, double beta) {
  const Spectrum flat = flatten_amplitude(forward_dft(img), beta);
  return renormalize_channels(img.height(), img.width(),
                              real_planes(inverse_dft_raw(flat)));
}

/// Replaces every amplitude with beta(level), keeps the phase, then
/// rescales each channel to [0, 1]. Since the reconstruction is linear in
/// beta, the rescale makes the output independent of the level.
inline ImageBuffer constant_amplitude(const ImageBuffer& img, int level) {
  return constant_amplitude_beta(img, fourier_severity(level).beta);
}

inline ImageBuffer high_pass_radius_filter(const ImageBuffer& img, double radius) {
  const auto filtered = high_pass_filter(forward_dft(img), radius);
  if (filtered.removed_per_channel == 0) return inverse_dft(filtered.spectrum);
  std::vector<double> planes = real_planes(inverse_dft_raw(filtered.spectrum));
  for (double& v : planes) v = std::abs(v);
  return renormalize_channels(img.height(), img.width(), std::move(planes));
}

/// Removes frequencies within d = d_fraction(level) * min(H, W) of the
/// spectrum centre, then maps |result| per channel onto [0, 1].
inline ImageBuffer high_pass(const ImageBuffer& img, int level) {
  return high_pass_radius_filter(img, high_pass_radius(img.height(), img.width(), level));
}

}  // namespace acvc

#endif  // ACVC_FOURIER_HPP_
