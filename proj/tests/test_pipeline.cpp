// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "voxaug/errors.hpp"
#include "voxaug/pipeline.hpp"
#include "voxaug/scene.hpp"
#include "voxaug/segment.hpp"

using namespace voxaug;
namespace fs = std::filesystem;

namespace {

Trajectory small_demo(int size = 32) {
  const AnalyticScene scene = make_scene_preset("workspace");
  const PinholeCamera cam = make_default_camera(size, size);
  DemoSpec spec = make_demo_preset("pick-lift", scene);
  spec.timesteps = 6;
  spec.t_grasp = 2;
  return generate_demo_trajectory(scene, spec, cam);
}

VoxelField small_object_field(uint64_t seed) {
  // dense enough that the rendered opacity clears the mask threshold
  VoxelField f = VoxelField::create(8, 8, 8, {-0.08, -0.08, -0.08}, {0.08, 0.08, 0.08});
  RngStream rng(seed);
  for (auto& v : f.raw_density) v = static_cast<float>(20.0 + 40.0 * rng.u01());
  for (auto& v : f.raw_rgb) v = static_cast<float>(2.0 * rng.u01() - 1.0);
  return f;
}

VoxelField small_background_field(uint64_t seed) {
  VoxelField f = VoxelField::create(8, 8, 8, {-0.5, -0.4, -0.05}, {0.5, 0.4, 0.3});
  RngStream rng(seed);
  for (auto& v : f.raw_density) v = static_cast<float>(2.0 * rng.u01() - 2.5);
  for (auto& v : f.raw_rgb) v = static_cast<float>(2.0 * rng.u01() - 1.0);
  return f;
}

AugmentConfig small_cfg(int size = 32) {
  AugmentConfig cfg;
  cfg.object_render.samples_per_ray = 24;
  cfg.object_render.t_near = 0.02;
  cfg.object_render.t_far = 1.5;
  cfg.background_render = cfg.object_render;
  cfg.background_render.background_rgb = {0.08, 0.09, 0.11};
  cfg.output_width = cfg.output_height = size;
  return cfg;
}

bool trajectory_frames_equal_bits(const Trajectory& a, const Trajectory& b) {
  if (a.steps.size() != b.steps.size()) return false;
  for (size_t t = 0; t < a.steps.size(); ++t)
    if (!images_equal_bits(a.steps[t].frame, b.steps[t].frame)) return false;
  return true;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("trajectory round-trip preserves poses, actions and quantized frames") {
  const Trajectory traj = small_demo();
  const std::string dir = (fs::temp_directory_path() / "voxaug_traj_roundtrip").string();
  fs::remove_all(dir);
  write_trajectory(traj, dir);
  const Trajectory back = read_trajectory(dir);

  REQUIRE(back.steps.size() == traj.steps.size());
  CHECK(back.t_grasp == traj.t_grasp);
  CHECK(testutil::mat4_max_abs_diff(back.camera_offset.as_matrix(),
                                    traj.camera_offset.as_matrix()) <= 1e-12);
  CHECK(testutil::mat4_max_abs_diff(back.object_to_world.as_matrix(),
                                    traj.object_to_world.as_matrix()) <= 1e-12);
  for (size_t t = 0; t < traj.steps.size(); ++t) {
    CHECK(testutil::mat4_max_abs_diff(back.steps[t].gripper_pose.as_matrix(),
                                      traj.steps[t].gripper_pose.as_matrix()) <= 1e-12);
    // actions survive the CSV byte-for-byte (printed with round-trip precision)
    CHECK(std::memcmp(back.steps[t].action.data(), traj.steps[t].action.data(),
                      sizeof(Action)) == 0);
    // frames come back as their 8-bit quantization
    for (size_t i = 0; i < traj.steps[t].frame.data.size(); ++i)
      CHECK(back.steps[t].frame.data[i] ==
            static_cast<float>(quantize_u8(traj.steps[t].frame.data[i])) / 255.0f);
  }
  REQUIRE(back.object_masks.size() == traj.object_masks.size());
  for (size_t t = 0; t < traj.object_masks.size(); ++t)
    CHECK(images_equal_bits(back.object_masks[t], traj.object_masks[t]));
  fs::remove_all(dir);
}

TEST_CASE("missing frame file is reported with its index") {
  const Trajectory traj = small_demo();
  const std::string dir = (fs::temp_directory_path() / "voxaug_traj_missing").string();
  fs::remove_all(dir);
  write_trajectory(traj, dir);
  fs::remove(fs::path(dir) / "frames" / "000003.png");
  try {
    read_trajectory(dir);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("000003") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("unknown schema version is rejected") {
  const Trajectory traj = small_demo();
  const std::string dir = (fs::temp_directory_path() / "voxaug_traj_schema").string();
  fs::remove_all(dir);
  write_trajectory(traj, dir);
  {
    std::ifstream in(fs::path(dir) / "meta.json");
    std::string meta((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    const auto pos = meta.find("\"schema_version\": 1");
    REQUIRE(pos != std::string::npos);
    meta.replace(pos, 19, "\"schema_version\": 2");
    std::ofstream out(fs::path(dir) / "meta.json");
    out << meta;
  }
  CHECK_THROWS_AS(read_trajectory(dir), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("posed dataset round-trip and bbox hint") {
  const AnalyticScene scene = make_scene_preset("sphere");
  const PinholeCamera cam = make_default_camera(32, 32);
  const PosedImageDataset dataset = generate_posed_dataset(scene, cam, 3, OrbitSpec{}, 7);
  const std::string dir = (fs::temp_directory_path() / "voxaug_dataset_roundtrip").string();
  fs::remove_all(dir);
  const Vec3 lo{-0.16, -0.16, -0.16}, hi{0.16, 0.16, 0.16};
  write_posed_dataset(dataset, dir, &lo, &hi);
  const PosedImageDataset back = read_posed_dataset(dir);
  REQUIRE(back.frames.size() == 3);
  for (size_t i = 0; i < back.frames.size(); ++i)
    CHECK(testutil::mat4_max_abs_diff(back.frames[i].camera_to_world.as_matrix(),
                                      dataset.frames[i].camera_to_world.as_matrix()) <= 1e-12);
  Vec3 rlo, rhi;
  REQUIRE(read_dataset_bbox_hint(dir, &rlo, &rhi));
  CHECK(rlo == lo);
  CHECK(rhi == hi);
  fs::remove_all(dir);
}

TEST_CASE("evaluation: identical trajectories cap at the sentinel") {
  const Trajectory traj = small_demo();
  const EvalReport report = evaluate_augmentation(traj, traj);
  for (const double p : report.frame_psnr_db) CHECK(p == kPsnrCapDb);
  CHECK(report.mean_psnr_db == kPsnrCapDb);
  REQUIRE(report.frame_mask_iou.size() == traj.steps.size());
  for (const double iou : report.frame_mask_iou) CHECK(iou == 1.0);
}

TEST_CASE("evaluation: a uniform 0.1 offset reads 20 dB") {
  Trajectory a = small_demo();
  Trajectory b = a;
  for (auto& step : b.steps)
    for (auto& v : step.frame.data) v += 0.1f;
  const EvalReport report = evaluate_augmentation(b, a);
  for (const double p : report.frame_psnr_db) CHECK(p == doctest::Approx(20.0).epsilon(1e-5));
}

TEST_CASE("evaluation: disjoint masks read IoU 0") {
  Trajectory a = small_demo();
  Trajectory b = a;
  for (auto& m : a.object_masks) m = Image::create(m.width, m.height, 1, 0.0f);
  for (auto& m : b.object_masks) m = Image::create(m.width, m.height, 1, 1.0f);
  for (size_t t = 0; t < a.object_masks.size(); ++t) a.object_masks[t].at(0, 0, 0) = 1.0f;
  for (size_t t = 0; t < b.object_masks.size(); ++t) b.object_masks[t].at(0, 0, 0) = 0.0f;
  const EvalReport report = evaluate_augmentation(a, b);
  for (const double iou : report.frame_mask_iou) CHECK(iou == 0.0);
  CHECK_THROWS_AS(evaluate_augmentation(a, Trajectory{}), ValidationError);
}

TEST_CASE("augmentation preserves length, poses, intrinsics and action bytes") {
  const Trajectory demo = small_demo();
  const VoxelField object_field = small_object_field(301);
  const VoxelField background_field = small_background_field(302);
  const AugmentConfig cfg = small_cfg();

  const Trajectory out = augment_trajectory(demo, object_field, background_field, cfg);
  REQUIRE(out.steps.size() == demo.steps.size());
  CHECK(out.t_grasp == demo.t_grasp);
  CHECK(out.cam.width == demo.cam.width);
  CHECK(out.cam.fx == demo.cam.fx);
  for (size_t t = 0; t < demo.steps.size(); ++t) {
    CHECK(std::memcmp(out.steps[t].action.data(), demo.steps[t].action.data(), sizeof(Action)) ==
          0);
    CHECK(std::memcmp(&out.steps[t].gripper_pose, &demo.steps[t].gripper_pose,
                      sizeof(Se3Pose)) == 0);
  }
}

TEST_CASE("augmentation with noise off is deterministic") {
  const Trajectory demo = small_demo();
  const VoxelField object_field = small_object_field(303);
  const VoxelField background_field = small_background_field(304);
  const AugmentConfig cfg = small_cfg();
  const Trajectory a = augment_trajectory(demo, object_field, background_field, cfg);
  const Trajectory b = augment_trajectory(demo, object_field, background_field, cfg);
  CHECK(trajectory_frames_equal_bits(a, b));
}

TEST_CASE("the novel-object mask freezes after the grasp") {
  const Trajectory demo = small_demo();
  const VoxelField object_field = small_object_field(305);
  const VoxelField background_field = small_background_field(306);
  const Trajectory out = augment_trajectory(demo, object_field, background_field, small_cfg());
  const Image& frozen = out.object_masks[static_cast<size_t>(demo.t_grasp)];
  for (size_t t = static_cast<size_t>(demo.t_grasp); t < out.object_masks.size(); ++t)
    CHECK(images_equal_bits(out.object_masks[t], frozen));
}

TEST_CASE("pixels outside both masks pass through bit-identically") {
  const Trajectory demo = small_demo();
  const VoxelField object_field = small_object_field(307);
  const VoxelField background_field = small_background_field(308);
  const AugmentConfig cfg = small_cfg();
  const Trajectory out = augment_trajectory(demo, object_field, background_field, cfg);

  for (size_t t = 0; t < demo.steps.size(); ++t) {
    const Image dilated = dilate_mask(demo.object_masks[t], cfg.dilate_radius);
    const Image& m_nerf = out.object_masks[t];
    for (int y = 0; y < demo.cam.height; ++y)
      for (int x = 0; x < demo.cam.width; ++x) {
        if (dilated.at(x, y, 0) > 0.5f || m_nerf.at(x, y, 0) > 0.5f) continue;
        for (int c = 0; c < 3; ++c)
          CHECK(out.steps[t].frame.at(x, y, c) == demo.steps[t].frame.at(x, y, c));
      }
  }
}

TEST_CASE("noise modes perturb the post-grasp chain") {
  const Trajectory demo = small_demo();
  const VoxelField object_field = small_object_field(309);
  const VoxelField background_field = small_background_field(310);
  AugmentConfig cfg = small_cfg();
  const Trajectory base = augment_trajectory(demo, object_field, background_field, cfg);

  cfg.noise.mode = NoiseConfig::Mode::PerTrajectory;
  cfg.noise.sigma_rot = 0.05;
  cfg.noise.sigma_trans = 0.01;
  cfg.noise.seed = 17;
  const Trajectory per_traj = augment_trajectory(demo, object_field, background_field, cfg);
  // pre-grasp frames untouched by noise
  for (int t = 0; t < demo.t_grasp; ++t)
    CHECK(images_equal_bits(per_traj.steps[static_cast<size_t>(t)].frame,
                            base.steps[static_cast<size_t>(t)].frame));
  // same perturbation held post-grasp: masks still frozen
  const Image& frozen = per_traj.object_masks[static_cast<size_t>(demo.t_grasp)];
  for (size_t t = static_cast<size_t>(demo.t_grasp); t < per_traj.object_masks.size(); ++t)
    CHECK(images_equal_bits(per_traj.object_masks[t], frozen));
  // determinism in the noise seed
  CHECK(trajectory_frames_equal_bits(per_traj,
                                     augment_trajectory(demo, object_field, background_field, cfg)));

  cfg.noise.mode = NoiseConfig::Mode::PerTimestep;
  const Trajectory per_step = augment_trajectory(demo, object_field, background_field, cfg);
  CHECK_FALSE(trajectory_frames_equal_bits(per_step, per_traj));
}

TEST_CASE("output can be resized with rescaled intrinsics") {
  const Trajectory demo = small_demo(32);
  const VoxelField object_field = small_object_field(311);
  const VoxelField background_field = small_background_field(312);
  AugmentConfig cfg = small_cfg(16);
  const Trajectory out = augment_trajectory(demo, object_field, background_field, cfg);
  CHECK(out.cam.width == 16);
  CHECK(out.cam.height == 16);
  CHECK(out.cam.fx == doctest::Approx(demo.cam.fx * 0.5).epsilon(1e-12));
  CHECK(out.steps[0].frame.width == 16);
  CHECK(out.object_masks[0].width == 16);
}

TEST_CASE("invalid demos are rejected") {
  Trajectory bad = small_demo();
  bad.t_grasp = 99;
  const VoxelField object_field = small_object_field(313);
  const VoxelField background_field = small_background_field(314);
  CHECK_THROWS_AS(augment_trajectory(bad, object_field, background_field, small_cfg()),
                  ValidationError);
}

}  // TEST_SUITE
