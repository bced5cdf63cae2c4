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
#ifndef ACVC_CORRUPTION_KIND_HPP_
#define ACVC_CORRUPTION_KIND_HPP_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "acvc/errors.hpp"

namespace acvc {

// Order matters: the first 19 are the ImageNet-C style kinds grouped by
// family, the last 3 are the Fourier kinds.
enum class CorruptionKind {
  fog,
  snow,
  frost,
  spatter,
  gaussian_blur,
  glass_blur,
  motion_blur,
  defocus_blur,
  zoom_blur,
  shot_noise,
  impulse_noise,
  gaussian_noise,
  speckle_noise,
  jpeg_compression,
  pixelate,
  elastic,
  saturate,
  brightness,
  contrast,
  phase_scaling,
  constant_amplitude,
  high_pass,
};

inline constexpr int kKindCount = 22;
inline constexpr int kImageNetCKindCount = 19;

inline constexpr std::array<std::string_view, kKindCount> kKindNames{
    "fog",           "snow",           "frost",           "spatter",
    "gaussian_blur", "glass_blur",     "motion_blur",     "defocus_blur",
    "zoom_blur",     "shot_noise",     "impulse_noise",   "gaussian_noise",
    "speckle_noise", "jpeg_compression", "pixelate",      "elastic",
    "saturate",      "brightness",     "contrast",        "phase_scaling",
    "constant_amplitude", "high_pass",
};

inline std::string_view name_of(CorruptionKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

inline std::optional<CorruptionKind> try_parse_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == name) return static_cast<CorruptionKind>(i);
  return std::nullopt;
}

inline CorruptionKind parse_kind(std::string_view name) {
  if (auto k = try_parse_kind(name)) return *k;
  throw DomainError("unknown corruption kind '" + std::string(name) + "'");
}

inline bool is_fourier(CorruptionKind kind) {
  return static_cast<int>(kind) >= kImageNetCKindCount;
}

inline std::vector<CorruptionKind> all_kinds() {
  std::vector<CorruptionKind> out;
  for (int i = 0; i < kKindCount; ++i) out.push_back(static_cast<CorruptionKind>(i));
  return out;
}

enum class Family { weather, blur, noise, digital, fourier };

inline std::optional<Family> try_parse_family(std::string_view name) {
  if (name == "weather") return Family::weather;
  if (name == "blur") return Family::blur;
  if (name == "noise") return Family::noise;
  if (name == "digital") return Family::digital;
  if (name == "fourier") return Family::fourier;
  return std::nullopt;
}

inline std::vector<CorruptionKind> list_family(Family family) {
  using K = CorruptionKind;
  switch (family) {
    case Family::weather: return {K::fog, K::snow, K::frost, K::spatter};
    case Family::blur:
      return {K::gaussian_blur, K::glass_blur, K::motion_blur, K::defocus_blur,
              K::zoom_blur};
    case Family::noise:
      return {K::shot_noise, K::impulse_noise, K::gaussian_noise, K::speckle_noise};
    case Family::digital:
      return {K::jpeg_compression, K::pixelate, K::elastic, K::saturate,
              K::brightness, K::contrast};
    case Family::fourier: return {K::phase_scaling, K::constant_amplitude, K::high_pass};
  }
  return {};
}

inline std::vector<CorruptionKind> list_family(std::string_view family) {
  if (auto f = try_parse_family(family)) return list_family(*f);
  throw DomainError("unknown corruption family '" + std::string(family) + "'");
}

inline Family family_of(CorruptionKind kind) {
  for (Family f : {Family::weather, Family::blur, Family::noise, Family::digital,
                   Family::fourier})
    for (CorruptionKind k : list_family(f))
      if (k == kind) return f;
  return Family::fourier;
}

// Kinds whose output depends only on (input, level).
inline bool is_deterministic(CorruptionKind kind) {
  using K = CorruptionKind;
  switch (kind) {
    case K::brightness:
    case K::contrast:
    case K::saturate:
    case K::pixelate:
    case K::jpeg_compression:
    case K::gaussian_blur:
    case K::defocus_blur:
    case K::zoom_blur:
    case K::phase_scaling:
    case K::constant_amplitude:
    case K::high_pass:
      return true;
    default:
      return false;
  }
}

}  // namespace acvc

#endif  // ACVC_CORRUPTION_KIND_HPP_
