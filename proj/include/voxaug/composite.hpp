// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voxaug/image.hpp"

namespace voxaug {

/// Erases the original object: background-render pixels inside the mask,
/// frame pixels untouched (bit-identical) outside.
Image inpaint_background(const Image& frame, const Image& original_mask,
                         const Image& background_render);

/// out = i_nerf * m + i_no_object * (1 - m), elementwise. For a hard mask
/// this copies bits: m = 1 returns the novel-object pixel exactly, m = 0 the
/// inpainted pixel exactly.
Image blend(const Image& i_nerf, const Image& m_nerf, const Image& i_no_object);

}  // namespace voxaug
