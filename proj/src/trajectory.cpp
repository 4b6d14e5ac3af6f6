// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxaug/trajectory.hpp"

#include <string>

#include "voxaug/errors.hpp"

namespace voxaug {

void Trajectory::validate() const {
  cam.validate();
  if (steps.size() < 2) throw ValidationError("Trajectory: needs at least 2 steps");
  if (t_grasp < 0 || t_grasp >= static_cast<int>(steps.size()))
    throw ValidationError("Trajectory: t_grasp = " + std::to_string(t_grasp) +
                          " outside [0, " + std::to_string(steps.size()) + ")");
  for (size_t i = 0; i < steps.size(); ++i) {
    const Image& f = steps[i].frame;
    if (f.width != cam.width || f.height != cam.height || f.channels != 3)
      throw ValidationError("Trajectory: frame " + std::to_string(i) +
                            " does not match the camera dimensions");
  }
  if (!object_masks.empty()) {
    if (object_masks.size() != steps.size())
      throw ValidationError("Trajectory: mask count differs from step count");
    for (size_t i = 0; i < object_masks.size(); ++i)
      if (object_masks[i].width != cam.width || object_masks[i].height != cam.height ||
          object_masks[i].channels != 1)
        throw ValidationError("Trajectory: mask " + std::to_string(i) + " has wrong shape");
  }
}

std::vector<Se3Pose> Trajectory::gripper_poses() const {
  std::vector<Se3Pose> poses;
  poses.reserve(steps.size());
  for (const auto& s : steps) poses.push_back(s.gripper_pose);
  return poses;
}

int detect_t_grasp(const Trajectory& traj) {
  for (size_t t = 0; t < traj.steps.size(); ++t)
    if (traj.steps[t].action[6] >= 0.5) return static_cast<int>(t);
  return -1;
}

}  // namespace voxaug
