// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voxaug/image.hpp"

namespace voxaug {

/// Candidate stage of the segmenter: 1 where the max-channel absolute
/// difference between frame and background render exceeds the threshold.
/// Monotone in the threshold.
Image difference_candidates(const Image& frame, const Image& background_render,
                            double threshold);

/// Locates the foreground object by disagreement against a render of the
/// object-free scene: thresholded per-pixel difference, then connected
/// components (8-connectivity) smaller than min_blob pixels are dropped.
/// Stands in for a learned segmenter + tracker; the interface is one frame
/// in, one hard mask out, so such a stack can be swapped back in.
Image segment_by_background(const Image& frame, const Image& background_render,
                            double threshold, int min_blob);

/// Morphological dilation with a square structuring element of half-width
/// radius.
Image dilate_mask(const Image& mask, int radius);

}  // namespace voxaug
