// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxaug/render.hpp"

#include "voxaug/errors.hpp"

namespace voxaug {

void RenderConfig::validate() const {
  if (samples_per_ray < 2) throw ValidationError("RenderConfig: samples_per_ray must be >= 2");
  if (!(t_near < t_far)) throw ValidationError("RenderConfig: t_near must be < t_far");
}

RayShade render_ray(const VoxelField& field, const Ray& ray, const RenderConfig& cfg,
                    uint64_t pixel_key) {
  cfg.validate();
  return detail::march_ray(field, ray, cfg, pixel_key, detail::NullRecorder{});
}

namespace {

RenderOutput render_frame(const VoxelField& field, const PinholeCamera& cam,
                          const Se3Pose& camera_pose, const RenderConfig& cfg, bool parallel) {
  cam.validate();
  cfg.validate();
  RenderOutput out;
  out.rgb = Image::create(cam.width, cam.height, 3);
  out.opacity = Image::create(cam.width, cam.height, 1);

  const int h = cam.height, w = cam.width;
#pragma omp parallel for schedule(static) if (parallel)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Ray ray = generate_ray(cam, camera_pose, x, y);
      const uint64_t pixel_key = static_cast<uint64_t>(y) * static_cast<uint64_t>(w) + x;
      const RayShade shade =
          detail::march_ray(field, ray, cfg, pixel_key, detail::NullRecorder{});
      out.rgb.at(x, y, 0) = static_cast<float>(shade.rgb.x);
      out.rgb.at(x, y, 1) = static_cast<float>(shade.rgb.y);
      out.rgb.at(x, y, 2) = static_cast<float>(shade.rgb.z);
      out.opacity.at(x, y, 0) = static_cast<float>(shade.opacity);
    }
  }
  return out;
}

}  // namespace

RenderOutput render_image(const VoxelField& field, const PinholeCamera& cam,
                          const Se3Pose& camera_pose, const RenderConfig& cfg) {
  return render_frame(field, cam, camera_pose, cfg, true);
}

RenderOutput render_image_serial(const VoxelField& field, const PinholeCamera& cam,
                                 const Se3Pose& camera_pose, const RenderConfig& cfg) {
  return render_frame(field, cam, camera_pose, cfg, false);
}

Image opacity_to_mask(const Image& opacity, double tau) {
  if (opacity.channels != 1) throw ValidationError("opacity_to_mask: expected 1-channel map");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("opacity_to_mask: tau outside [0, 1]");
  Image mask = Image::create(opacity.width, opacity.height, 1);
  for (size_t i = 0; i < opacity.data.size(); ++i)
    mask.data[i] = opacity.data[i] > tau ? 1.0f : 0.0f;
  return mask;
}

}  // namespace voxaug
