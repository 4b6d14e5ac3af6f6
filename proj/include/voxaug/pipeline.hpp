// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "voxaug/field.hpp"
#include "voxaug/render.hpp"
#include "voxaug/train.hpp"
#include "voxaug/trajectory.hpp"

namespace voxaug {

struct NoiseConfig {
  enum class Mode { Off, PerTrajectory, PerTimestep };
  Mode mode = Mode::Off;
  double sigma_rot = 0.0;    // radians
  double sigma_trans = 0.0;  // meters
  uint64_t seed = 0;
};

struct AugmentConfig {
  double tau = 0.5;  // opacity threshold for the novel-object mask
  NoiseConfig noise;
  RenderConfig object_render;      // background defaults to black
  RenderConfig background_render;  // set background_rgb to the scene ambient
  double segment_threshold = 0.05;
  int segment_min_blob = 8;
  int dilate_radius = 1;
  enum class MaskSource { Auto, GroundTruth, Segment } mask_source = MaskSource::Auto;
  bool soft_mask = false;  // blend with raw opacity instead of the hard mask
  int output_width = 128;
  int output_height = 128;

  void validate() const;
};

/// Replays the demo's camera chain through the object field. Per timestep:
/// camera-to-object pose (frozen from t_grasp, optionally perturbed), novel
/// object render + mask, original-object mask (ground truth or
/// background-disagreement), inpaint, blend. Poses, intrinsics, t_grasp and
/// actions are copied through untouched; the output carries the novel
/// object's masks. Noise applies from t_grasp on: one perturbation held for
/// the rest of the trajectory (PerTrajectory) or a fresh one each step
/// (PerTimestep).
Trajectory augment_trajectory(const Trajectory& demo, const VoxelField& object_field,
                              const VoxelField& background_field, const AugmentConfig& cfg);

/// Directory layout: meta.json (schema_version 1, t_grasp, camera,
/// camera_offset, object_to_world, n_steps), frames/000000.png ...,
/// masks/000000.png (when masks exist), poses.json, actions.csv with header
/// t,dx,dy,dz,droll,dpitch,dyaw,grip.
void write_trajectory(const Trajectory& traj, const std::string& dir);
Trajectory read_trajectory(const std::string& dir);

/// Posed dataset directory: meta.json (schema_version 1, camera, n_frames,
/// optional suggested bbox), frames/000000.png ..., poses.json.
void write_posed_dataset(const PosedImageDataset& dataset, const std::string& dir,
                         const Vec3* suggested_bbox_min = nullptr,
                         const Vec3* suggested_bbox_max = nullptr);
PosedImageDataset read_posed_dataset(const std::string& dir);

/// Reads the optional suggested field bbox from a dataset directory's
/// meta.json. Returns false when absent.
bool read_dataset_bbox_hint(const std::string& dir, Vec3* bbox_min, Vec3* bbox_max);

struct EvalReport {
  std::vector<double> frame_psnr_db;  // capped at the 99 dB sentinel
  double mean_psnr_db = 0.0;
  std::vector<double> frame_mask_iou;  // empty unless both sides carry masks
};

/// Sentinel reported instead of an infinite PSNR on identical frames.
constexpr double kPsnrCapDb = 99.0;

EvalReport evaluate_augmentation(const Trajectory& produced, const Trajectory& oracle);

}  // namespace voxaug
