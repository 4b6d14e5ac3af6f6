// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "voxaug/field.hpp"
#include "voxaug/geometry.hpp"
#include "voxaug/image.hpp"
#include "voxaug/rng.hpp"

namespace voxaug {

struct RenderConfig {
  int samples_per_ray = 128;
  double t_near = 0.02;
  double t_far = 2.5;
  Vec3 background_rgb{0.0, 0.0, 0.0};
  bool stratified = false;
  uint64_t seed = 0;

  void validate() const;
};

struct RenderOutput {
  Image rgb;      // H x W x 3
  Image opacity;  // H x W x 1, accumulated alpha in [0, 1]
};

struct RayShade {
  Vec3 rgb;
  double opacity = 0.0;
};

namespace detail {

/// Intersection of [cfg.t_near, cfg.t_far], [ray.t_near, ray.t_far] and the
/// slab interval of the field bbox. hit == false means no in-range overlap;
/// samples outside the bbox would contribute nothing, so they are not taken.
struct RayInterval {
  double t0 = 0.0, t1 = 0.0;
  bool hit = false;
};

inline RayInterval clip_ray(const VoxelField& field, const Ray& ray, const RenderConfig& cfg) {
  double t0 = ray.t_near > cfg.t_near ? ray.t_near : cfg.t_near;
  double t1 = ray.t_far < cfg.t_far ? ray.t_far : cfg.t_far;
  for (int a = 0; a < 3; ++a) {
    const double o = ray.origin[a], d = ray.direction[a];
    const double bmin = field.bbox_min[a], bmax = field.bbox_max[a];
    if (d == 0.0) {
      if (o < bmin || o > bmax) return {};
      continue;
    }
    double ta = (bmin - o) / d;
    double tb = (bmax - o) / d;
    if (ta > tb) std::swap(ta, tb);
    if (ta > t0) t0 = ta;
    if (tb < t1) t1 = tb;
  }
  if (!(t0 < t1)) return {};
  return {t0, t1, true};
}

struct NullRecorder {
  void operator()(const Vec3& /*point*/, double /*delta*/, const FieldSample& /*s*/,
                  double /*alpha*/, double /*transmittance*/) const {}
};

/// Shared ray-march kernel. Sample positions are midpoints of samples_per_ray
/// equal segments over the clipped interval, or jittered within each segment
/// when cfg.stratified (per-ray stream keyed by (cfg.seed, pixel_key), never
/// by thread identity). delta_i = t_{i+1} - t_i, and the last sample's delta
/// runs to the end of the interval. Compositing:
///   alpha_i = 1 - exp(-sigma_i * delta_i),  T_i = prod_{j<i} (1 - alpha_j),
///   rgb = sum_i T_i alpha_i c_i + (prod_i (1 - alpha_i)) * background,
///   opacity = sum_i T_i alpha_i.
/// The recorder sees every in-bbox sample with its alpha and incoming T;
/// the trainer uses it to replay the march for backpropagation.
template <typename Recorder>
RayShade march_ray(const VoxelField& field, const Ray& ray, const RenderConfig& cfg,
                   uint64_t pixel_key, Recorder&& record) {
  const RayInterval iv = clip_ray(field, ray, cfg);
  if (!iv.hit) return {cfg.background_rgb, 0.0};

  const int n = cfg.samples_per_ray;
  const double seg = (iv.t1 - iv.t0) / n;

  thread_local std::vector<double> jitter;
  if (cfg.stratified) {
    jitter.resize(static_cast<size_t>(n));
    RngStream stream(mix_key(cfg.seed, pixel_key, 0x6a697474ULL));  // "jitt"
    for (int i = 0; i < n; ++i) jitter[static_cast<size_t>(i)] = stream.u01();
  }

  auto t_at = [&](int i) {
    const double xi = cfg.stratified ? jitter[static_cast<size_t>(i)] : 0.5;
    return iv.t0 + (i + xi) * seg;
  };

  double transmittance = 1.0;
  Vec3 rgb{0.0, 0.0, 0.0};
  double opacity = 0.0;
  double t = t_at(0);
  for (int i = 0; i < n; ++i) {
    const double t_next = (i + 1 < n) ? t_at(i + 1) : iv.t1;
    const double delta = t_next - t;
    const Vec3 p = ray.origin + ray.direction * t;
    const RawSample raw = trilinear_sample(field, p);
    if (raw.density != -std::numeric_limits<double>::infinity()) {
      const FieldSample s = activate(raw);
      const double alpha = 1.0 - std::exp(-s.sigma * delta);
      const double w = transmittance * alpha;
      rgb += s.rgb * w;
      opacity += w;
      record(p, delta, s, alpha, transmittance);
      transmittance *= 1.0 - alpha;
    }
    t = t_next;
  }
  rgb += cfg.background_rgb * transmittance;
  return {rgb, opacity};
}

}  // namespace detail

RayShade render_ray(const VoxelField& field, const Ray& ray, const RenderConfig& cfg,
                    uint64_t pixel_key = 0);

/// Full-frame render, parallel across pixels (OpenMP). Bitwise-deterministic
/// for a fixed cfg.seed at any thread count.
RenderOutput render_image(const VoxelField& field, const PinholeCamera& cam,
                          const Se3Pose& camera_pose, const RenderConfig& cfg);

/// Single-thread reference; tests assert it matches render_image bitwise.
RenderOutput render_image_serial(const VoxelField& field, const PinholeCamera& cam,
                                 const Se3Pose& camera_pose, const RenderConfig& cfg);

/// Hard mask: 1 where opacity > tau, else 0. tau must lie in [0, 1].
Image opacity_to_mask(const Image& opacity, double tau);

}  // namespace voxaug
