// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <omp.h>

#include <cmath>

#include "helpers.hpp"
#include "voxaug/errors.hpp"
#include "voxaug/render.hpp"

using namespace voxaug;

namespace {

// softplus^-1, so tests can pin an exact activated density.
double raw_for_sigma(double sigma) { return sigma + std::log(-std::expm1(-sigma)); }

VoxelField constant_field(double sigma, const Vec3& rgb_raw, const Vec3& bmin, const Vec3& bmax) {
  VoxelField f = VoxelField::create(4, 4, 4, bmin, bmax,
                                    static_cast<float>(raw_for_sigma(sigma)));
  for (size_t i = 0; i < f.node_count(); ++i) {
    f.raw_rgb[i * 3 + 0] = static_cast<float>(rgb_raw.x);
    f.raw_rgb[i * 3 + 1] = static_cast<float>(rgb_raw.y);
    f.raw_rgb[i * 3 + 2] = static_cast<float>(rgb_raw.z);
  }
  return f;
}

// raw density around -45 activates to a sigma below 1e-19, which vanishes in
// the double-precision alpha; the field is exactly empty space.
VoxelField vacuum_field() {
  return VoxelField::create(4, 4, 4, {-0.2, -0.2, -0.2}, {0.2, 0.2, 0.2}, -45.0f);
}

Ray x_axis_ray(double x0) {
  Ray ray;
  ray.origin = {x0, 0.0, 0.0};
  ray.direction = {1.0, 0.0, 0.0};
  return ray;
}

VoxelField random_field(uint64_t seed) {
  VoxelField f = VoxelField::create(5, 5, 5, {-0.2, -0.2, -0.2}, {0.2, 0.2, 0.2});
  RngStream rng(seed);
  for (auto& v : f.raw_density) v = static_cast<float>(8.0 * rng.u01() - 3.0);
  for (auto& v : f.raw_rgb) v = static_cast<float>(6.0 * rng.u01() - 3.0);
  return f;
}

}  // namespace

TEST_SUITE("render") {

TEST_CASE("empty space returns the background with zero opacity") {
  const VoxelField f = vacuum_field();
  RenderConfig cfg;
  cfg.t_near = 0.0;
  cfg.t_far = 1.0;
  cfg.samples_per_ray = 32;
  cfg.background_rgb = {0.25, 0.5, 0.75};
  const RayShade s = render_ray(f, x_axis_ray(-0.5), cfg);
  CHECK(s.rgb == cfg.background_rgb);
  CHECK(s.opacity == 0.0);

  // a ray that misses the bbox entirely
  Ray miss = x_axis_ray(-0.5);
  miss.origin.y = 5.0;
  const RayShade m = render_ray(f, miss, cfg);
  CHECK(m.rgb == cfg.background_rgb);
  CHECK(m.opacity == 0.0);
}

TEST_CASE("homogeneous medium quadrature converges monotonically to 1 - exp(-2)") {
  // sigma = 10/m over an 0.2 m crossing
  const VoxelField f =
      constant_field(10.0, {0.0, 0.0, 0.0}, {0.0, -0.1, -0.1}, {0.2, 0.1, 0.1});
  RenderConfig cfg;
  cfg.t_near = 0.0;
  cfg.t_far = 5.0;
  const double analytic = 1.0 - std::exp(-2.0);

  double prev_err = 1.0;
  for (const int n : {64, 128, 256, 512}) {
    cfg.samples_per_ray = n;
    const RayShade s = render_ray(f, x_axis_ray(-0.3), cfg);
    const double err = std::fabs(s.opacity - analytic);
    CHECK(err < prev_err);
    prev_err = err;
    if (n == 512) CHECK(err <= 1e-3);
  }
}

TEST_CASE("opaque slab saturates to its own color") {
  const Vec3 rgb_raw{1.2, -0.4, 0.3};
  const VoxelField f = constant_field(1e4, rgb_raw, {0.0, -0.1, -0.1}, {0.2, 0.1, 0.1});
  RenderConfig cfg;
  cfg.t_near = 0.0;
  cfg.t_far = 5.0;
  cfg.samples_per_ray = 64;
  const RayShade s = render_ray(f, x_axis_ray(-0.3), cfg);
  CHECK(s.opacity >= 0.999);
  for (int c = 0; c < 3; ++c)
    CHECK(std::fabs(s.rgb[c] - logistic(rgb_raw[c])) <= 1e-3);
}

TEST_CASE("empty field renders a constant background image") {
  const VoxelField f = vacuum_field();
  const PinholeCamera cam = [] {
    PinholeCamera c;
    c.width = c.height = 32;
    c.fx = c.fy = 30.0;
    c.cx = c.cy = 16.0;
    return c;
  }();
  RenderConfig cfg;
  cfg.background_rgb = {0.1, 0.2, 0.3};
  cfg.samples_per_ray = 16;
  const RenderOutput out = render_image(f, cam, Se3Pose::from_translation({0, 0, 1.0}), cfg);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      CHECK(out.rgb.at(x, y, 0) == 0.1f);
      CHECK(out.rgb.at(x, y, 1) == 0.2f);
      CHECK(out.rgb.at(x, y, 2) == 0.3f);
      CHECK(out.opacity.at(x, y, 0) == 0.0f);
    }
}

TEST_CASE("render_image is bitwise-deterministic across calls and thread counts") {
  const VoxelField f = random_field(51);
  const PinholeCamera cam = [] {
    PinholeCamera c;
    c.width = c.height = 48;
    c.fx = c.fy = 40.0;
    c.cx = c.cy = 24.0;
    return c;
  }();
  RenderConfig cfg;
  cfg.samples_per_ray = 48;
  cfg.stratified = true;
  cfg.seed = 99;
  const Se3Pose pose = Se3Pose::from_translation({0, 0, 0.9});

  const int n_before = omp_get_max_threads();
  omp_set_num_threads(1);
  const RenderOutput a = render_image(f, cam, pose, cfg);
  omp_set_num_threads(8);
  const RenderOutput b = render_image(f, cam, pose, cfg);
  const RenderOutput c = render_image(f, cam, pose, cfg);
  omp_set_num_threads(n_before);
  const RenderOutput serial = render_image_serial(f, cam, pose, cfg);

  CHECK(images_equal_bits(a.rgb, b.rgb));
  CHECK(images_equal_bits(a.opacity, b.opacity));
  CHECK(images_equal_bits(b.rgb, c.rgb));
  CHECK(images_equal_bits(a.rgb, serial.rgb));
  CHECK(images_equal_bits(a.opacity, serial.opacity));
}

TEST_CASE("opacity and rgb stay in range for arbitrary fields") {
  RngStream rng(52);
  for (int trial = 0; trial < 20; ++trial) {
    const VoxelField f = random_field(100 + trial);
    RenderConfig cfg;
    cfg.samples_per_ray = 33;
    cfg.stratified = (trial % 2) == 1;
    cfg.seed = trial;
    cfg.background_rgb = {rng.u01(), rng.u01(), rng.u01()};
    Ray ray;
    ray.origin = testutil::random_unit_vec(rng) * 0.8;
    ray.direction = normalized(Vec3{0, 0, 0} - ray.origin + testutil::random_unit_vec(rng) * 0.1);
    const RayShade s = render_ray(f, ray, cfg, rng.next_u64());
    CHECK(s.opacity >= 0.0);
    CHECK(s.opacity <= 1.0);
    for (int c = 0; c < 3; ++c) {
      CHECK(s.rgb[c] >= 0.0);
      CHECK(s.rgb[c] <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("opacity_to_mask thresholds") {
  Image op = Image::create(4, 4, 1, 0.0f);
  Image m = opacity_to_mask(op, 0.5);
  for (const float v : m.data) CHECK(v == 0.0f);

  op = Image::create(4, 4, 1, 1.0f);
  m = opacity_to_mask(op, 0.5);
  for (const float v : m.data) CHECK(v == 1.0f);

  op.at(1, 1, 0) = 0.5f;  // strictly-greater comparison
  m = opacity_to_mask(op, 0.5);
  CHECK(m.at(1, 1, 0) == 0.0f);

  CHECK_THROWS_AS(opacity_to_mask(op, 1.5), ValidationError);
}

TEST_CASE("config validation") {
  RenderConfig cfg;
  cfg.samples_per_ray = 1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.samples_per_ray = 8;
  cfg.t_near = 1.0;
  cfg.t_far = 0.5;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

}  // TEST_SUITE
