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
#ifndef ACVC_REGISTRY_HPP_
#define ACVC_REGISTRY_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acvc/corruption_kind.hpp"
#include "acvc/fourier.hpp"
#include "acvc/image.hpp"
#include "acvc/photometric.hpp"
#include "acvc/random.hpp"
#include "acvc/severity_table.hpp"

namespace acvc {

/// One element of the corruption pool together with its severity.
struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::fog;
  int level = 1;

  friend bool operator==(const CorruptionSpec&, const CorruptionSpec&) = default;
};

inline std::string to_string(const CorruptionSpec& spec) {
  return std::string(name_of(spec.kind)) + "_s" + std::to_string(spec.level);
}

/// Uniform kind from `pool`, then an independent uniform level in 1..5.
inline CorruptionSpec sample_corruption(std::span<const CorruptionKind> pool, Rng& rng) {
  if (pool.empty()) throw DomainError("cannot sample from an empty corruption pool");
  const CorruptionKind kind = pool[uniform_index(rng, pool.size())];
  const int level = 1 + static_cast<int>(uniform_index(rng, 5));
  return {kind, level};
}

/// Routes Fourier kinds to the fourier module and everything else to the
/// photometric dispatcher.
inline ImageBuffer apply(const CorruptionSpec& spec, const ImageBuffer& img, Rng& rng,
                         const SeverityTable& table = builtin_severity_table()) {
  check_level(spec.level);
  switch (spec.kind) {
    case CorruptionKind::phase_scaling: return phase_scaling(img, spec.level);
    case CorruptionKind::constant_amplitude: return constant_amplitude(img, spec.level);
    case CorruptionKind::high_pass: return high_pass(img, spec.level);
    default: return apply_photometric(spec.kind, spec.level, img, rng, table);
  }
}

/// Pool descriptors: a family name, "imagenet_c" (the 19 non-Fourier
/// kinds), "vc" (all 22), or a comma-separated list of kind names.
inline std::vector<CorruptionKind> pool_for(std::string_view descriptor) {
  if (auto family = try_parse_family(descriptor)) return list_family(*family);
  if (descriptor == "vc") return all_kinds();
  if (descriptor == "imagenet_c") {
    auto kinds = all_kinds();
    kinds.resize(kImageNetCKindCount);
    return kinds;
  }
  std::vector<CorruptionKind> kinds;
  std::size_t start = 0;
  while (start <= descriptor.size()) {
    const std::size_t comma = std::min(descriptor.find(',', start), descriptor.size());
    const std::string_view item = descriptor.substr(start, comma - start);
    auto kind = try_parse_kind(item);
    if (!kind)
      throw DomainError("unknown pool descriptor '" + std::string(descriptor) + "'");
    kinds.push_back(*kind);
    start = comma + 1;
  }
  return kinds;
}

}  // namespace acvc

#endif  // ACVC_REGISTRY_HPP_
