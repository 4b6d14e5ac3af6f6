// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxaug/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <memory>

#include "voxaug/errors.hpp"

namespace voxaug {

Image Image::create(int w, int h, int c, float fill) {
  if (w <= 0 || h <= 0 || (c != 1 && c != 3))
    throw ValidationError("Image::create: bad shape " + std::to_string(w) + "x" +
                          std::to_string(h) + "x" + std::to_string(c));
  Image img;
  img.width = w;
  img.height = h;
  img.channels = c;
  img.data.assign(static_cast<size_t>(w) * h * c, fill);
  return img;
}

unsigned char quantize_u8(float v) {
  const float clamped = std::fmin(1.0f, std::fmax(0.0f, v));
  return static_cast<unsigned char>(std::floor(clamped * 255.0f + 0.5f));
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void save_png(const Image& img, const std::string& path) {
  if (img.channels != 1 && img.channels != 3)
    throw ValidationError("save_png: only 1- or 3-channel images are supported");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("save_png: cannot open '" + path + "' for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("save_png: png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("save_png: png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("save_png: libpng error writing '" + path + "'");
  }
  png_init_io(png, fp.get());
  const int color_type = img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<unsigned char> row(static_cast<size_t>(img.width) * img.channels);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c)
        row[static_cast<size_t>(x) * img.channels + c] = quantize_u8(img.at(x, y, c));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image load_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("load_png: cannot open '" + path + "'");

  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw FormatError("load_png: '" + path + "' is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("load_png: png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("load_png: png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("load_png: libpng failed to decode '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const png_byte color = png_get_color_type(png, info);
  const int channels = (color == PNG_COLOR_TYPE_GRAY) ? 1 : 3;
  if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_RGB) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("load_png: unsupported color type in '" + path + "'");
  }

  Image img = Image::create(static_cast<int>(w), static_cast<int>(h), channels);
  std::vector<unsigned char> row(static_cast<size_t>(w) * channels);
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c)
        img.at(static_cast<int>(x), static_cast<int>(y), c) =
            static_cast<float>(row[static_cast<size_t>(x) * channels + c]) / 255.0f;
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

Image resize_area(const Image& img, int new_width, int new_height) {
  if (new_width <= 0 || new_height <= 0)
    throw ValidationError("resize_area: non-positive target size");
  if (new_width == img.width && new_height == img.height) return img;

  Image out = Image::create(new_width, new_height, img.channels);
  const double sx = static_cast<double>(img.width) / new_width;
  const double sy = static_cast<double>(img.height) / new_height;
  for (int oy = 0; oy < new_height; ++oy) {
    const double y0 = oy * sy, y1 = (oy + 1) * sy;
    const int iy0 = static_cast<int>(std::floor(y0));
    const int iy1 = std::min(img.height, static_cast<int>(std::ceil(y1)));
    for (int ox = 0; ox < new_width; ++ox) {
      const double x0 = ox * sx, x1 = (ox + 1) * sx;
      const int ix0 = static_cast<int>(std::floor(x0));
      const int ix1 = std::min(img.width, static_cast<int>(std::ceil(x1)));
      for (int c = 0; c < img.channels; ++c) {
        double acc = 0.0, area = 0.0;
        for (int iy = iy0; iy < iy1; ++iy) {
          const double hy = std::min<double>(iy + 1, y1) - std::max<double>(iy, y0);
          for (int ix = ix0; ix < ix1; ++ix) {
            const double wx = std::min<double>(ix + 1, x1) - std::max<double>(ix, x0);
            acc += hy * wx * img.at(ix, iy, c);
            area += hy * wx;
          }
        }
        out.at(ox, oy, c) = static_cast<float>(acc / area);
      }
    }
  }
  return out;
}

double psnr_db(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ValidationError("psnr_db: image shapes differ");
  double se = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    se += d * d;
  }
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = se / static_cast<double>(a.data.size());
  return -10.0 * std::log10(mse);
}

double mask_iou(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ValidationError("mask_iou: mask shapes differ");
  size_t inter = 0, uni = 0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const bool av = a.data[i] > 0.5f, bv = b.data[i] > 0.5f;
    inter += (av && bv);
    uni += (av || bv);
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

bool images_equal_bits(const Image& a, const Image& b) {
  return a.same_shape(b) &&
         std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0;
}

}  // namespace voxaug
