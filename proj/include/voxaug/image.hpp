// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "voxaug/math.hpp"

namespace voxaug {

/// Row-major float image, channel-innermost. Channels is 1 (grayscale,
/// opacity maps, masks) or 3 (RGB). Values live in [0, 1]; hard masks use
/// exactly 0 and 1.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;

  static Image create(int w, int h, int c, float fill = 0.0f);

  float& at(int x, int y, int c) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  float at(int x, int y, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }

  Vec3 rgb_at(int x, int y) const {
    const size_t i = (static_cast<size_t>(y) * width + x) * channels;
    return {data[i], data[i + 1], data[i + 2]};
  }

  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }

  size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

/// 8-bit PNG write; quantization is round-half-up of value * 255 after
/// clamping to [0, 1]. 1-channel images become grayscale PNGs, 3-channel RGB.
void save_png(const Image& img, const std::string& path);

/// Reads 8-bit grayscale or RGB PNGs (palette and 16-bit inputs are
/// converted); values come back as k / 255.
Image load_png(const std::string& path);

/// Box-filter (exact area-weighted) resample. Returns a bitwise copy when
/// the target size equals the source size.
Image resize_area(const Image& img, int new_width, int new_height);

/// Round-half-up 8-bit quantization used by save_png, exposed for tests.
unsigned char quantize_u8(float v);

/// PSNR in dB over all pixels and channels, with MSE taken per channel
/// sample; +infinity for identical images.
double psnr_db(const Image& a, const Image& b);

/// Intersection-over-union of two hard masks (values > 0.5 count as set).
/// Two empty masks are identical, hence IoU 1.
double mask_iou(const Image& a, const Image& b);

bool images_equal_bits(const Image& a, const Image& b);

}  // namespace voxaug
