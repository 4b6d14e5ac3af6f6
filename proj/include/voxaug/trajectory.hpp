// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include "voxaug/geometry.hpp"
#include "voxaug/image.hpp"

namespace voxaug {

/// Per-timestep action: world-frame translation delta (m), roll/pitch/yaw
/// delta (rad) of the relative rotation, and a gripper command in [0, 1].
using Action = std::array<double, 7>;

struct TrajectoryStep {
  Image frame;
  Se3Pose gripper_pose;  // gripper-to-world
  Action action{};
};

/// An expert demonstration: frames from the single gripper camera, gripper
/// poses, actions, the grasp timestep, and the (original) object pose.
/// Synthetic demos also carry ground-truth object masks.
struct Trajectory {
  PinholeCamera cam;
  Se3Pose camera_offset;    // gripper -> camera mount
  Se3Pose object_to_world;  // original object pose (dataset metadata)
  int t_grasp = 0;
  std::vector<TrajectoryStep> steps;
  std::vector<Image> object_masks;  // empty, or one hard mask per step

  void validate() const;
  std::vector<Se3Pose> gripper_poses() const;
};

/// Fallback when t_grasp metadata is absent: first timestep whose gripper
/// command reaches 0.5. Returns -1 if the gripper never closes.
int detect_t_grasp(const Trajectory& traj);

}  // namespace voxaug
