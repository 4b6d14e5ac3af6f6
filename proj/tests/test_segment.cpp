// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "helpers.hpp"
#include "voxaug/errors.hpp"
#include "voxaug/scene.hpp"
#include "voxaug/segment.hpp"

using namespace voxaug;

namespace {

Image random_frame(int w, int h, uint64_t seed) {
  Image img = Image::create(w, h, 3);
  RngStream rng(seed);
  for (auto& v : img.data) v = static_cast<float>(rng.u01());
  return img;
}

Image random_mask(int w, int h, uint64_t seed, double fill = 0.2) {
  Image img = Image::create(w, h, 1);
  RngStream rng(seed);
  for (auto& v : img.data) v = rng.u01() < fill ? 1.0f : 0.0f;
  return img;
}

}  // namespace

TEST_SUITE("segment") {

TEST_CASE("identical images give an empty mask") {
  const Image frame = random_frame(24, 16, 81);
  const Image mask = segment_by_background(frame, frame, 0.05, 8);
  for (const float v : mask.data) CHECK(v == 0.0f);
}

TEST_CASE("isolated pixels fall to the blob filter") {
  Image frame = Image::create(16, 16, 3, 0.5f);
  Image background = frame;
  frame.at(7, 7, 0) = 1.0f;
  const Image filtered = segment_by_background(frame, background, 0.05, 2);
  for (const float v : filtered.data) CHECK(v == 0.0f);
  const Image kept = segment_by_background(frame, background, 0.05, 1);
  CHECK(kept.at(7, 7, 0) == 1.0f);
}

TEST_CASE("candidates are monotone in the threshold") {
  const Image frame = random_frame(32, 32, 82);
  const Image background = random_frame(32, 32, 83);
  const Image loose = difference_candidates(frame, background, 0.1);
  const Image tight = difference_candidates(frame, background, 0.3);
  for (size_t i = 0; i < loose.data.size(); ++i)
    if (tight.data[i] > 0.5f) CHECK(loose.data[i] == 1.0f);
}

TEST_CASE("workspace frame vs background-only render recovers the object") {
  const AnalyticScene scene = make_scene_preset("workspace");
  const AnalyticScene background_only = scene.without_group("object");
  const PinholeCamera cam = make_default_camera(96, 96);
  const Se3Pose pose = look_at({0.05, -0.35, 0.3}, {0.05, 0.0, 0.05});

  const auto with_object = analytic_render(scene, cam, pose);
  const auto without_object = analytic_render(background_only, cam, pose);
  const Image mask =
      segment_by_background(with_object.rgb, without_object.rgb, 0.05, 8);
  const Image* truth = with_object.mask_for("object");
  REQUIRE(truth != nullptr);
  CHECK(mask_iou(mask, *truth) >= 0.95);
}

TEST_CASE("dilation") {
  SUBCASE("radius 0 is the identity") {
    const Image mask = random_mask(16, 16, 84);
    CHECK(images_equal_bits(dilate_mask(mask, 0), mask));
  }
  SUBCASE("a single pixel becomes a 3x3 block") {
    Image mask = Image::create(8, 8, 1);
    mask.at(4, 4, 0) = 1.0f;
    const Image d = dilate_mask(mask, 1);
    size_t set = 0;
    for (const float v : d.data) set += v > 0.5f;
    CHECK(set == 9);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) CHECK(d.at(4 + dx, 4 + dy, 0) == 1.0f);
  }
  SUBCASE("dilation is a superset") {
    for (int trial = 0; trial < 10; ++trial) {
      const Image mask = random_mask(20, 14, 85 + static_cast<uint64_t>(trial));
      for (int r = 0; r <= 3; ++r) {
        const Image d = dilate_mask(mask, r);
        for (size_t i = 0; i < mask.data.size(); ++i)
          if (mask.data[i] > 0.5f) CHECK(d.data[i] == 1.0f);
      }
    }
  }
}

TEST_CASE("dimension mismatch is rejected") {
  const Image a = random_frame(8, 8, 86);
  const Image b = random_frame(9, 8, 87);
  CHECK_THROWS_AS(segment_by_background(a, b, 0.05, 4), ValidationError);
}

}  // TEST_SUITE
