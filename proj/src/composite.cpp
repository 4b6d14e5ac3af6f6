// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxaug/composite.hpp"

#include "voxaug/errors.hpp"

namespace voxaug {

Image inpaint_background(const Image& frame, const Image& original_mask,
                         const Image& background_render) {
  if (!frame.same_shape(background_render))
    throw ValidationError("inpaint_background: frame/background dimensions differ");
  if (original_mask.width != frame.width || original_mask.height != frame.height ||
      original_mask.channels != 1)
    throw ValidationError("inpaint_background: mask shape mismatch");
  Image out = frame;
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x) {
      if (original_mask.at(x, y, 0) <= 0.5f) continue;
      for (int c = 0; c < frame.channels; ++c) out.at(x, y, c) = background_render.at(x, y, c);
    }
  return out;
}

Image blend(const Image& i_nerf, const Image& m_nerf, const Image& i_no_object) {
  if (!i_nerf.same_shape(i_no_object))
    throw ValidationError("blend: image dimensions differ");
  if (m_nerf.width != i_nerf.width || m_nerf.height != i_nerf.height || m_nerf.channels != 1)
    throw ValidationError("blend: mask shape mismatch");
  Image out = Image::create(i_nerf.width, i_nerf.height, i_nerf.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      const float m = m_nerf.at(x, y, 0);
      for (int c = 0; c < out.channels; ++c) {
        const float a = i_nerf.at(x, y, c), b = i_no_object.at(x, y, c);
        // hard-mask branches copy bits; the difference form keeps
        // blend(i, m, i) == i exact for soft masks
        out.at(x, y, c) = m == 1.0f ? a : (m == 0.0f ? b : b + m * (a - b));
      }
    }
  return out;
}

}  // namespace voxaug
