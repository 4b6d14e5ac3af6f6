// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>

#include "voxaug/math.hpp"

namespace voxaug {

/// Rigid transform in SE(3). The rotation is stored as a 3x3 matrix and is
/// checked for orthonormality at construction; there is no silent
/// re-orthonormalization anywhere in the library.
class Se3Pose {
 public:
  Se3Pose() = default;  // identity

  /// Throws ValidationError if R^T R deviates from I by more than 1e-6 per
  /// entry or det(R) is not 1 within 1e-6.
  Se3Pose(const Mat3& rotation, const Vec3& translation);

  static Se3Pose identity() { return {}; }
  static Se3Pose from_translation(const Vec3& t);
  static Se3Pose from_axis_angle(const Vec3& unit_axis, double angle, const Vec3& t = {});

  const Mat3& rotation() const { return rot_; }
  const Vec3& translation() const { return trans_; }

  /// 4x4 homogeneous matrix, row-major. Bottom row is exactly (0,0,0,1).
  std::array<double, 16> as_matrix() const;

  /// Parses a 16-number row-major homogeneous matrix; validates the rotation
  /// block and that the bottom row is (0,0,0,1) within 1e-9.
  static Se3Pose from_matrix(const std::array<double, 16>& m);

  bool operator==(const Se3Pose& o) const { return rot_ == o.rot_ && trans_ == o.trans_; }

 private:
  struct Unchecked {};
  Se3Pose(Unchecked, const Mat3& r, const Vec3& t) : rot_(r), trans_(t) {}

  friend Se3Pose compose(const Se3Pose&, const Se3Pose&);
  friend Se3Pose invert(const Se3Pose&);

  Mat3 rot_;
  Vec3 trans_;
};

/// a then b applied right-to-left: result maps x to a(b(x)).
Se3Pose compose(const Se3Pose& a, const Se3Pose& b);

Se3Pose invert(const Se3Pose& p);

/// Camera pose in the world frame given the gripper pose and the fixed
/// gripper-to-camera mount offset.
Se3Pose camera_to_world(const Se3Pose& gripper, const Se3Pose& camera_offset);

/// Camera pose expressed in the object frame.
Se3Pose camera_to_object(const Se3Pose& object_to_world, const Se3Pose& cam_to_world);

/// Camera-in-object pose along a trajectory. Before the grasp the object is
/// world-anchored; from t_grasp on the object rides the gripper, so the
/// relative pose is frozen at its t_grasp value (bitwise, since the same
/// inputs re-run the same arithmetic).
Se3Pose camera_to_object_at(std::span<const Se3Pose> gripper_poses,
                            const Se3Pose& object_to_world, const Se3Pose& camera_offset,
                            int t, int t_grasp);

/// Right-multiplies p by a random rigid perturbation: rotation about a
/// uniformly random axis with angle ~ N(0, sigma_rot), translation with
/// i.i.d. N(0, sigma_trans) components. Deterministic in the seed.
Se3Pose perturb_pose(const Se3Pose& p, double sigma_rot, double sigma_trans, uint64_t seed);

struct PinholeCamera {
  int width = 0;
  int height = 0;
  double fx = 0.0, fy = 0.0;  // focal lengths, pixels
  double cx = 0.0, cy = 0.0;  // principal point, pixels

  /// Throws ValidationError on non-positive focals or a principal point
  /// outside the image.
  void validate() const;
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
  double t_near = 0.0;
  double t_far = std::numeric_limits<double>::infinity();
};

/// Ray through pixel (u, v); fractional coordinates are allowed and the
/// half-pixel center offset is applied here. Camera convention: -z forward,
/// +x right, +y up, image origin top-left. Throws std::out_of_range for
/// pixels outside [0, width) x [0, height).
Ray generate_ray(const PinholeCamera& cam, const Se3Pose& camera_pose, double u, double v);

}  // namespace voxaug
