// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxaug/segment.hpp"

#include <cmath>
#include <vector>

#include "voxaug/errors.hpp"

namespace voxaug {

Image difference_candidates(const Image& frame, const Image& background_render,
                            double threshold) {
  if (!frame.same_shape(background_render))
    throw ValidationError("difference_candidates: image dimensions differ");
  if (!(threshold > 0.0)) throw ValidationError("difference_candidates: threshold must be > 0");
  Image mask = Image::create(frame.width, frame.height, 1);
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x) {
      float diff = 0.0f;
      for (int c = 0; c < frame.channels; ++c)
        diff = std::fmax(diff, std::fabs(frame.at(x, y, c) - background_render.at(x, y, c)));
      mask.at(x, y, 0) = diff > threshold ? 1.0f : 0.0f;
    }
  return mask;
}

Image segment_by_background(const Image& frame, const Image& background_render,
                            double threshold, int min_blob) {
  Image mask = difference_candidates(frame, background_render, threshold);
  if (min_blob <= 1) return mask;

  // Flood-fill 8-connected components, erasing the small ones.
  const int w = mask.width, h = mask.height;
  std::vector<uint8_t> seen(static_cast<size_t>(w) * h, 0);
  std::vector<int> stack, component;
  for (int y0 = 0; y0 < h; ++y0)
    for (int x0 = 0; x0 < w; ++x0) {
      const int start = y0 * w + x0;
      if (seen[static_cast<size_t>(start)] || mask.data[static_cast<size_t>(start)] == 0.0f)
        continue;
      stack.assign(1, start);
      component.clear();
      seen[static_cast<size_t>(start)] = 1;
      while (!stack.empty()) {
        const int p = stack.back();
        stack.pop_back();
        component.push_back(p);
        const int px = p % w, py = p / w;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = px + dx, ny = py + dy;
            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
            const int q = ny * w + nx;
            if (!seen[static_cast<size_t>(q)] && mask.data[static_cast<size_t>(q)] != 0.0f) {
              seen[static_cast<size_t>(q)] = 1;
              stack.push_back(q);
            }
          }
      }
      if (static_cast<int>(component.size()) < min_blob)
        for (const int p : component) mask.data[static_cast<size_t>(p)] = 0.0f;
    }
  return mask;
}

Image dilate_mask(const Image& mask, int radius) {
  if (mask.channels != 1) throw ValidationError("dilate_mask: expected 1-channel mask");
  if (radius < 0) throw ValidationError("dilate_mask: negative radius");
  if (radius == 0) return mask;
  const int w = mask.width, h = mask.height;
  Image out = Image::create(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float v = 0.0f;
      for (int dy = -radius; dy <= radius && v == 0.0f; ++dy) {
        const int ny = y + dy;
        if (ny < 0 || ny >= h) continue;
        for (int dx = -radius; dx <= radius; ++dx) {
          const int nx = x + dx;
          if (nx < 0 || nx >= w) continue;
          if (mask.at(nx, ny, 0) > 0.5f) {
            v = 1.0f;
            break;
          }
        }
      }
      out.at(x, y, 0) = v;
    }
  return out;
}

}  // namespace voxaug
