// Copyright 2026 The kurag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// RGB raster plus PNG encode/decode through libpng's simplified API.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <png.h>

#include "kurag/errors.hpp"

namespace kurag {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB

  RgbImage() = default;
  RgbImage(int w, int h, std::uint8_t fill = 255)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {}

  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    auto i = (static_cast<std::size_t>(y) * width + x) * 3;
    pixels[i] = r;
    pixels[i + 1] = g;
    pixels[i + 2] = b;
  }

  void fill_rect(int x, int y, int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    for (int yy = y; yy < y + h; ++yy) {
      for (int xx = x; xx < x + w; ++xx) set(xx, yy, r, g, b);
    }
  }

  // Copies `src` with its top-left corner at (x, y).
  void blit(const RgbImage& src, int x, int y) {
    for (int yy = 0; yy < src.height; ++yy) {
      for (int xx = 0; xx < src.width; ++xx) {
        auto i = (static_cast<std::size_t>(yy) * src.width + xx) * 3;
        set(x + xx, y + yy, src.pixels[i], src.pixels[i + 1], src.pixels[i + 2]);
      }
    }
  }

  // Nearest-neighbour resize.
  RgbImage resized(int w, int h) const {
    RgbImage out(w, h);
    for (int y = 0; y < h; ++y) {
      int sy = static_cast<int>(static_cast<long long>(y) * height / h);
      for (int x = 0; x < w; ++x) {
        int sx = static_cast<int>(static_cast<long long>(x) * width / w);
        auto i = (static_cast<std::size_t>(sy) * width + sx) * 3;
        out.set(x, y, pixels[i], pixels[i + 1], pixels[i + 2]);
      }
    }
    return out;
  }
};

// Returns nullopt for bytes that are not a decodable PNG.
inline std::optional<RgbImage> decode_png(std::string_view bytes) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    return std::nullopt;
  }
  img.format = PNG_FORMAT_RGB;
  RgbImage out(static_cast<int>(img.width), static_cast<int>(img.height));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    return std::nullopt;
  }
  return out;
}

inline std::string encode_png(const RgbImage& image) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    throw Error(std::string("png sizing failed: ") + img.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    throw Error(std::string("png encoding failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

}  // namespace kurag
