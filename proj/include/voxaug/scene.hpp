// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "voxaug/geometry.hpp"
#include "voxaug/image.hpp"
#include "voxaug/train.hpp"
#include "voxaug/trajectory.hpp"

namespace voxaug {

/// Constant-density emissive primitive. Boxes stay axis-aligned, so a rigid
/// motion applied to a box must be (numerically) rotation-free.
struct ScenePrimitive {
  enum class Kind { Sphere, Box };
  Kind kind = Kind::Sphere;
  Vec3 center;               // sphere
  double radius = 0.0;       // sphere
  Vec3 box_min, box_max;     // box
  double density = 0.0;      // 1/m
  Vec3 rgb;
  std::string group;         // "object", "background", ...

  static ScenePrimitive sphere(const Vec3& center, double radius, double density,
                               const Vec3& rgb, std::string group);
  static ScenePrimitive box(const Vec3& bmin, const Vec3& bmax, double density, const Vec3& rgb,
                            std::string group);

  void validate() const;

  /// Entry/exit distances of the ray through the primitive, clipped to
  /// [ray.t_near, ray.t_far]. False when the overlap is empty.
  bool intersect(const Ray& ray, double* t_enter, double* t_exit) const;

  /// Rigidly moved copy. Throws ValidationError for a box under a transform
  /// with a non-identity rotation.
  ScenePrimitive transformed(const Se3Pose& motion) const;
};

/// Piecewise-constant emissive volume used as ground truth everywhere: its
/// transmittance integrates in closed form, so renders carry no quadrature
/// error at all.
struct AnalyticScene {
  Vec3 background_rgb;
  std::vector<ScenePrimitive> primitives;

  void validate() const;
  bool has_group(const std::string& group) const;
  Vec3 group_centroid(const std::string& group) const;
  std::pair<Vec3, Vec3> group_bbox(const std::string& group) const;
  AnalyticScene without_group(const std::string& group) const;

  /// Scene with the named group rigidly moved.
  AnalyticScene with_group_moved(const std::string& group, const Se3Pose& motion) const;

  /// Object group re-expressed in the object frame (inverse of
  /// object_to_world applied), everything else dropped, background black.
  /// This is the scene an object-level field is trained against.
  AnalyticScene object_frame_scene(const Se3Pose& object_to_world) const;

  /// Scene with the object group replaced by other primitives given in the
  /// object frame, placed at object_to_world.
  AnalyticScene with_object_replaced(const std::vector<ScenePrimitive>& object_frame_prims,
                                     const Se3Pose& object_to_world) const;
};

struct AnalyticRenderResult {
  Image rgb;
  Image opacity;
  // One hard mask per distinct group, sorted by name: 1 where the group's
  // contribution to the accumulated opacity exceeds 0.5.
  std::vector<std::pair<std::string, Image>> group_masks;

  const Image* mask_for(const std::string& group) const;
};

/// Exact per-pixel integration: primitive intervals from analytic
/// intersections, transmittance as closed-form exponentials over the
/// piecewise-constant density, front-to-back compositing. Parallel across
/// pixels, deterministic at any thread count.
AnalyticRenderResult analytic_render(const AnalyticScene& scene, const PinholeCamera& cam,
                                     const Se3Pose& camera_pose);

/// Single-thread reference; bitwise-identical to analytic_render.
AnalyticRenderResult analytic_render_serial(const AnalyticScene& scene, const PinholeCamera& cam,
                                            const Se3Pose& camera_pose);

struct OrbitSpec {
  double radius = 0.55;
  std::vector<double> elevations_deg = {-25.0, 5.0, 30.0};
  double radius_spread = 0.3;  // radii span radius * (1 +/- spread/2)
};

/// Camera-to-world pose looking from eye toward target (-z forward).
Se3Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up = {0.0, 0.0, 1.0});

/// Look-at views on orbits around the object-group centroid, at golden-angle
/// azimuths, cycling elevations, radii spread between near and far.
/// Deterministic in the seed.
PosedImageDataset generate_posed_dataset(const AnalyticScene& scene, const PinholeCamera& cam,
                                         int n_views, const OrbitSpec& orbit, uint64_t seed);

/// Demonstration script: gripper waypoints (interpolated linearly, rotations
/// by shortest arc), the grasp timestep, the camera mount offset, and the
/// object pose.
struct DemoSpec {
  std::vector<Se3Pose> waypoints;
  int timesteps = 2;
  int t_grasp = 0;
  Se3Pose camera_offset;
  Se3Pose object_to_world;

  void validate() const;
  Se3Pose gripper_at(int t) const;
};

/// Renders the scripted demo through the gripper camera. From t_grasp on the
/// object group rides the gripper rigidly. Actions hold world-frame
/// translation deltas, XYZ Euler deltas of the relative rotation, and the
/// gripper command (1 from t_grasp on); ground-truth object masks are stored
/// alongside the frames.
Trajectory generate_demo_trajectory(const AnalyticScene& scene, const DemoSpec& spec,
                                    const PinholeCamera& cam);

/// Shipped scenes: "sphere" (matte ball at the origin), "mug-proxy" (ball
/// plus handle box), "workspace" (table, two racks, object ball on top).
AnalyticScene make_scene_preset(const std::string& name);

/// Shipped demos for the workspace scene: "pick-lift" (approach, grasp,
/// lift) and "approach" (straight move-in along the view axis, grasp at the
/// last step).
DemoSpec make_demo_preset(const std::string& name, const AnalyticScene& scene);

PinholeCamera make_default_camera(int width = 128, int height = 128, double fov_deg = 50.0);

/// Scene JSON: {schema_version, background_rgb, primitives: [{shape, ...,
/// density, rgb, group}]}.
AnalyticScene load_scene_json(const std::string& path);
void save_scene_json(const AnalyticScene& scene, const std::string& path);

/// Demo JSON: {schema_version, timesteps, t_grasp, camera_offset,
/// object_to_world, waypoints} with poses as row-major 16-number arrays.
DemoSpec load_demo_json(const std::string& path);
void save_demo_json(const DemoSpec& spec, const std::string& path);

}  // namespace voxaug
