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
#ifndef ACVC_IMAGE_IO_HPP_
#define ACVC_IMAGE_IO_HPP_

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <cstdio>
#include <jpeglib.h>

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "acvc/errors.hpp"
#include "acvc/image.hpp"

namespace acvc {

/// Interleaved 8-bit RGB raster, the on-disk representation.
struct Rgb8 {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;  // height * width * 3, interleaved
};

// Round-half-up with clamping to [0, 255].
inline std::uint8_t quantize(double v) {
  const double q = std::floor(v * 255.0 + 0.5);
  return static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
}

inline Rgb8 to_rgb8(const ImageBuffer& img) {
  Rgb8 out{img.height(), img.width(), {}};
  out.pixels.resize(img.plane_size() * kChannels);
  for (int c = 0; c < kChannels; ++c) {
    auto plane = img.channel(c);
    for (std::size_t i = 0; i < plane.size(); ++i)
      out.pixels[i * kChannels + c] = quantize(plane[i]);
  }
  return out;
}

inline ImageBuffer from_rgb8(const Rgb8& raster) {
  const std::size_t n = static_cast<std::size_t>(raster.height) * raster.width;
  std::vector<double> planes(n * kChannels);
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < kChannels; ++c)
      planes[c * n + i] = raster.pixels[i * kChannels + c] / 255.0;
  return ImageBuffer(raster.height, raster.width, std::move(planes));
}

namespace detail {

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

inline std::string lower_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  return ext;
}

// Returns false and fills `why` on failure. No C++ object with a
// non-trivial destructor may be constructed between setjmp and the libjpeg
// calls, so `out` is owned by the caller.
inline bool decode_jpeg_into(const std::uint8_t* data, std::size_t size,
                             Rgb8& out, std::string& why) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    why = err.message;
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data, static_cast<unsigned long>(size));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.height = static_cast<int>(cinfo.output_height);
  out.width = static_cast<int>(cinfo.output_width);
  out.pixels.resize(static_cast<std::size_t>(out.height) * out.width * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.pixels.data() +
                   static_cast<std::size_t>(cinfo.output_scanline) * out.width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

inline bool encode_jpeg_into(const Rgb8& raster, int quality,
                             std::vector<std::uint8_t>& out, std::string& why) {
  jpeg_compress_struct cinfo;
  JpegErrorManager err;
  unsigned char* buffer = nullptr;
  unsigned long buffer_size = 0;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    why = err.message;
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &buffer_size);
  cinfo.image_width = static_cast<JDIMENSION>(raster.width);
  cinfo.image_height = static_cast<JDIMENSION>(raster.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPLE*>(raster.pixels.data() +
                                     static_cast<std::size_t>(cinfo.next_scanline) *
                                         raster.width * 3);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  out.assign(buffer, buffer + buffer_size);
  jpeg_destroy_compress(&cinfo);
  std::free(buffer);
  return true;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError("cannot open image '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

/// JPEG encode/decode round trip at the given quality (1..100).
inline ImageBuffer jpeg_roundtrip(const ImageBuffer& img, int quality) {
  std::vector<std::uint8_t> encoded;
  std::string why;
  if (!detail::encode_jpeg_into(to_rgb8(img), quality, encoded, why))
    throw IoError("jpeg encode failed: " + why);
  Rgb8 decoded;
  if (!detail::decode_jpeg_into(encoded.data(), encoded.size(), decoded, why))
    throw IoError("jpeg decode failed: " + why);
  return from_rgb8(decoded);
}

/// Reads an 8-bit PNG or JPEG. Grayscale is replicated into three channels
/// and each byte v becomes v / 255.
inline ImageBuffer load_image(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  const std::string name = path.string();
  Rgb8 raster;
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()))
      throw DecodeError("cannot decode PNG '" + name + "': " + png.message);
    png.format = PNG_FORMAT_RGB;
    raster.height = static_cast<int>(png.height);
    raster.width = static_cast<int>(png.width);
    raster.pixels.resize(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, raster.pixels.data(), 0, nullptr)) {
      png_image_free(&png);
      throw DecodeError("cannot decode PNG '" + name + "': " + png.message);
    }
  } else if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 &&
             bytes[2] == 0xFF) {
    std::string why;
    if (!detail::decode_jpeg_into(bytes.data(), bytes.size(), raster, why))
      throw DecodeError("cannot decode JPEG '" + name + "': " + why);
  } else {
    throw DecodeError("unsupported image format '" + name + "'");
  }
  if (raster.height < kMinImageSide || raster.width < kMinImageSide)
    throw DecodeError("image '" + name + "' is smaller than 8x8");
  return from_rgb8(raster);
}

/// Writes PNG (lossless) or JPEG (quality 95) chosen by file extension.
inline void save_image(const ImageBuffer& img, const std::filesystem::path& path,
                       int jpeg_quality = 95) {
  const Rgb8 raster = to_rgb8(img);
  const std::string ext = detail::lower_extension(path);
  const std::string name = path.string();
  if (ext == ".png") {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(raster.width);
    png.height = static_cast<png_uint_32>(raster.height);
    png.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&png, name.c_str(), 0, raster.pixels.data(), 0,
                                 nullptr))
      throw IoError("cannot write '" + name + "': " + png.message);
  } else if (ext == ".jpg" || ext == ".jpeg") {
    std::vector<std::uint8_t> encoded;
    std::string why;
    if (!detail::encode_jpeg_into(raster, jpeg_quality, encoded, why))
      throw IoError("cannot encode '" + name + "': " + why);
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(encoded.data()),
              static_cast<std::streamsize>(encoded.size()));
    if (!out) throw IoError("cannot write '" + name + "'");
  } else {
    throw IoError("unsupported output extension for '" + name + "'");
  }
}

inline bool is_image_path(const std::filesystem::path& p) {
  const std::string ext = detail::lower_extension(p);
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace acvc

#endif  // ACVC_IMAGE_IO_HPP_
