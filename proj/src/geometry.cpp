// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxaug/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "voxaug/errors.hpp"
#include "voxaug/rng.hpp"

namespace voxaug {

namespace {

constexpr double kOrthoTol = 1e-6;

void check_rotation(const Mat3& r) {
  const Mat3 rtr = r.transposed() * r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double want = (i == j) ? 1.0 : 0.0;
      if (std::fabs(rtr(i, j) - want) > kOrthoTol)
        throw ValidationError("Se3Pose: rotation is not orthonormal (R^T R entry (" +
                              std::to_string(i) + "," + std::to_string(j) + ") = " +
                              std::to_string(rtr(i, j)) + ")");
    }
  if (std::fabs(r.determinant() - 1.0) > kOrthoTol)
    throw ValidationError("Se3Pose: det(R) = " + std::to_string(r.determinant()) +
                          ", expected 1");
}

}  // namespace

Se3Pose::Se3Pose(const Mat3& rotation, const Vec3& translation)
    : rot_(rotation), trans_(translation) {
  check_rotation(rot_);
}

Se3Pose Se3Pose::from_translation(const Vec3& t) {
  Se3Pose p;
  p.trans_ = t;
  return p;
}

Se3Pose Se3Pose::from_axis_angle(const Vec3& unit_axis, double angle, const Vec3& t) {
  return Se3Pose(rotation_from_axis_angle(unit_axis, angle), t);
}

std::array<double, 16> Se3Pose::as_matrix() const {
  return {rot_(0, 0), rot_(0, 1), rot_(0, 2), trans_.x,  //
          rot_(1, 0), rot_(1, 1), rot_(1, 2), trans_.y,  //
          rot_(2, 0), rot_(2, 1), rot_(2, 2), trans_.z,  //
          0.0,        0.0,        0.0,        1.0};
}

Se3Pose Se3Pose::from_matrix(const std::array<double, 16>& m) {
  for (int c = 0; c < 3; ++c)
    if (std::fabs(m[12 + c]) > 1e-9)
      throw ValidationError("pose matrix: bottom row is not (0,0,0,1)");
  if (std::fabs(m[15] - 1.0) > 1e-9)
    throw ValidationError("pose matrix: bottom row is not (0,0,0,1)");
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = m[static_cast<size_t>(i) * 4 + j];
  return Se3Pose(r, {m[3], m[7], m[11]});
}

Se3Pose compose(const Se3Pose& a, const Se3Pose& b) {
  return Se3Pose(Se3Pose::Unchecked{}, a.rot_ * b.rot_, a.rot_ * b.trans_ + a.trans_);
}

Se3Pose invert(const Se3Pose& p) {
  const Mat3 rt = p.rot_.transposed();
  return Se3Pose(Se3Pose::Unchecked{}, rt, -(rt * p.trans_));
}

Se3Pose camera_to_world(const Se3Pose& gripper, const Se3Pose& camera_offset) {
  return compose(gripper, camera_offset);
}

Se3Pose camera_to_object(const Se3Pose& object_to_world, const Se3Pose& cam_to_world) {
  return compose(invert(object_to_world), cam_to_world);
}

Se3Pose camera_to_object_at(std::span<const Se3Pose> gripper_poses,
                            const Se3Pose& object_to_world, const Se3Pose& camera_offset,
                            int t, int t_grasp) {
  const int n = static_cast<int>(gripper_poses.size());
  if (t < 0 || t >= n)
    throw std::out_of_range("camera_to_object_at: t = " + std::to_string(t) +
                            " outside [0, " + std::to_string(n) + ")");
  if (t_grasp < 0 || t_grasp >= n)
    throw std::out_of_range("camera_to_object_at: t_grasp = " + std::to_string(t_grasp) +
                            " outside [0, " + std::to_string(n) + ")");
  const int tt = t < t_grasp ? t : t_grasp;
  return camera_to_object(object_to_world, camera_to_world(gripper_poses[tt], camera_offset));
}

Se3Pose perturb_pose(const Se3Pose& p, double sigma_rot, double sigma_trans, uint64_t seed) {
  if (sigma_rot < 0.0 || sigma_trans < 0.0)
    throw ValidationError("perturb_pose: negative sigma");
  RngStream rng(mix_key(seed, 0x706f7365ULL));  // "pose"
  const double z = 2.0 * rng.u01() - 1.0;
  const double phi = 2.0 * M_PI * rng.u01();
  const double s = std::sqrt(std::fmax(0.0, 1.0 - z * z));
  const Vec3 axis{s * std::cos(phi), s * std::sin(phi), z};
  const double angle = sigma_rot * rng.normal();
  const Vec3 dt{sigma_trans * rng.normal(), sigma_trans * rng.normal(),
                sigma_trans * rng.normal()};
  return compose(p, Se3Pose(rotation_from_axis_angle(axis, angle), dt));
}

void PinholeCamera::validate() const {
  if (width <= 0 || height <= 0)
    throw ValidationError("PinholeCamera: non-positive image dimensions");
  if (!(fx > 0.0) || !(fy > 0.0)) throw ValidationError("PinholeCamera: focal lengths must be > 0");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    throw ValidationError("PinholeCamera: principal point outside image");
}

Ray generate_ray(const PinholeCamera& cam, const Se3Pose& camera_pose, double u, double v) {
  if (!(u >= 0.0 && u < cam.width) || !(v >= 0.0 && v < cam.height))
    throw std::out_of_range("generate_ray: pixel (" + std::to_string(u) + ", " +
                            std::to_string(v) + ") outside image");
  const Vec3 dir_cam = normalized(
      Vec3{(u + 0.5 - cam.cx) / cam.fx, -(v + 0.5 - cam.cy) / cam.fy, -1.0});
  Ray ray;
  ray.origin = camera_pose.translation();
  ray.direction = camera_pose.rotation() * dir_cam;
  return ray;
}

}  // namespace voxaug
