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
#ifndef ACVC_TESTS_SUPPORT_FIXTURES_HPP_
#define ACVC_TESTS_SUPPORT_FIXTURES_HPP_

// Shared test inputs: ten small, visually different images, plus naive
// reference implementations used as independent oracles.

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "acvc/image.hpp"

namespace acvc::testing {

inline ImageBuffer make_image(int h, int w, auto&& fn) {
  std::vector<double> data(static_cast<std::size_t>(kChannels) * h * w);
  for (int c = 0; c < kChannels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        data[(static_cast<std::size_t>(c) * h + y) * w + x] = fn(c, y, x);
  return ImageBuffer(h, w, std::move(data));
}

inline ImageBuffer random_image(int h, int w, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return make_image(h, w, [&](int, int, int) { return u(gen); });
}

// Ten 32x32 images: ramps, checks, a disk, stripes, smooth blobs, noise,
// a near-constant image with one edge, and a photo-like mix.
inline std::vector<ImageBuffer> fixture_images() {
  constexpr int n = 32;
  const double pi = std::numbers::pi;
  std::vector<ImageBuffer> out;
  out.push_back(make_image(n, n, [](int c, int, int x) { return (x + 4.0 * c) / 40.0; }));
  out.push_back(make_image(n, n, [](int c, int y, int) { return 1.0 - (y + 3.0 * c) / 40.0; }));
  out.push_back(make_image(n, n, [](int c, int y, int x) {
    return ((x / 4 + y / 4) % 2) ? 0.85 - 0.1 * c : 0.1 + 0.05 * c;
  }));
  out.push_back(make_image(n, n, [](int c, int y, int x) {
    return std::hypot(x - 15.5, y - 15.5) < 9.0 ? 0.9 - 0.2 * c : 0.2 + 0.1 * c;
  }));
  out.push_back(make_image(n, n, [&](int c, int y, int x) {
    return 0.5 + 0.4 * std::sin(2 * pi * (x + 2 * y) / 11.0 + c);
  }));
  out.push_back(make_image(n, n, [&](int c, int y, int x) {
    return 0.5 + 0.25 * std::cos(2 * pi * x / 32.0) * std::sin(2 * pi * y / 16.0 + c);
  }));
  out.push_back(random_image(n, n, 11));
  out.push_back(make_image(n, n, [](int c, int, int x) { return x < 20 ? 0.3 : 0.35 + 0.1 * c; }));
  out.push_back(make_image(n, n, [](int c, int y, int x) {
    const bool tri = y > 6 && y < 26 && std::abs(x - 16) < (y - 6) * 0.6;
    return tri ? 0.15 : 0.7 + 0.1 * c;
  }));
  const ImageBuffer noise = random_image(n, n, 12);
  out.push_back(make_image(n, n, [&](int c, int y, int x) {
    return 0.6 * (x + y) / 62.0 + 0.4 * noise.at(c, y, x);
  }));
  return out;
}

// Textbook O(N^2) two-dimensional DFT; inverse carries the 1/N factor.
inline std::vector<std::complex<double>> naive_dft2(const std::vector<std::complex<double>>& in,
                                                    int h, int w, bool inverse = false) {
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<std::complex<double>> out(in.size());
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v) {
      std::complex<double> acc{};
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const double angle = sign * 2.0 * std::numbers::pi *
                               (static_cast<double>(u) * y / h + static_cast<double>(v) * x / w);
          acc += in[static_cast<std::size_t>(y) * w + x] *
                 std::complex<double>(std::cos(angle), std::sin(angle));
        }
      out[static_cast<std::size_t>(u) * w + v] = inverse ? acc / static_cast<double>(h * w) : acc;
    }
  return out;
}

// A scratch directory removed when the object goes out of scope.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("acvc_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace acvc::testing

#endif  // ACVC_TESTS_SUPPORT_FIXTURES_HPP_
