// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxaug/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "voxaug/errors.hpp"
#include "voxaug/rng.hpp"

namespace voxaug {

using nlohmann::json;

ScenePrimitive ScenePrimitive::sphere(const Vec3& center, double radius, double density,
                                      const Vec3& rgb, std::string group) {
  ScenePrimitive p;
  p.kind = Kind::Sphere;
  p.center = center;
  p.radius = radius;
  p.density = density;
  p.rgb = rgb;
  p.group = std::move(group);
  p.validate();
  return p;
}

ScenePrimitive ScenePrimitive::box(const Vec3& bmin, const Vec3& bmax, double density,
                                   const Vec3& rgb, std::string group) {
  ScenePrimitive p;
  p.kind = Kind::Box;
  p.box_min = bmin;
  p.box_max = bmax;
  p.density = density;
  p.rgb = rgb;
  p.group = std::move(group);
  p.validate();
  return p;
}

void ScenePrimitive::validate() const {
  if (kind == Kind::Sphere && !(radius > 0.0))
    throw ValidationError("ScenePrimitive: sphere radius must be > 0");
  if (kind == Kind::Box &&
      !(box_min.x < box_max.x && box_min.y < box_max.y && box_min.z < box_max.z))
    throw ValidationError("ScenePrimitive: box min must be < max componentwise");
  if (density < 0.0) throw ValidationError("ScenePrimitive: density must be >= 0");
  for (int c = 0; c < 3; ++c)
    if (!(rgb[c] >= 0.0 && rgb[c] <= 1.0))
      throw ValidationError("ScenePrimitive: rgb outside [0, 1]");
  if (group.empty()) throw ValidationError("ScenePrimitive: empty group name");
}

bool ScenePrimitive::intersect(const Ray& ray, double* t_enter, double* t_exit) const {
  double t0, t1;
  if (kind == Kind::Sphere) {
    const Vec3 oc = ray.origin - center;
    const double b = dot(oc, ray.direction);
    const double c = dot(oc, oc) - radius * radius;
    const double disc = b * b - c;
    if (disc <= 0.0) return false;
    const double root = std::sqrt(disc);
    t0 = -b - root;
    t1 = -b + root;
  } else {
    t0 = -std::numeric_limits<double>::infinity();
    t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
      const double o = ray.origin[a], d = ray.direction[a];
      const double lo = box_min[a], hi = box_max[a];
      if (d == 0.0) {
        if (o < lo || o > hi) return false;
        continue;
      }
      double ta = (lo - o) / d, tb = (hi - o) / d;
      if (ta > tb) std::swap(ta, tb);
      if (ta > t0) t0 = ta;
      if (tb < t1) t1 = tb;
    }
  }
  if (t0 < ray.t_near) t0 = ray.t_near;
  if (t1 > ray.t_far) t1 = ray.t_far;
  if (!(t0 < t1)) return false;
  *t_enter = t0;
  *t_exit = t1;
  return true;
}

ScenePrimitive ScenePrimitive::transformed(const Se3Pose& motion) const {
  ScenePrimitive out = *this;
  if (kind == Kind::Sphere) {
    out.center = motion.rotation() * center + motion.translation();
    return out;
  }
  // Axis-aligned boxes only translate; reject anything beyond fp residue of
  // an identity rotation.
  const Mat3& r = motion.rotation();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (std::fabs(r(i, j) - (i == j ? 1.0 : 0.0)) > 1e-9)
        throw ValidationError("ScenePrimitive: axis-aligned box cannot be rotated");
  out.box_min = box_min + motion.translation();
  out.box_max = box_max + motion.translation();
  return out;
}

void AnalyticScene::validate() const {
  for (int c = 0; c < 3; ++c)
    if (!(background_rgb[c] >= 0.0 && background_rgb[c] <= 1.0))
      throw ValidationError("AnalyticScene: background_rgb outside [0, 1]");
  std::set<std::string> groups;
  for (const auto& p : primitives) {
    p.validate();
    groups.insert(p.group);
  }
  if (groups.size() > 8) throw ValidationError("AnalyticScene: more than 8 primitive groups");
}

bool AnalyticScene::has_group(const std::string& group) const {
  for (const auto& p : primitives)
    if (p.group == group) return true;
  return false;
}

Vec3 AnalyticScene::group_centroid(const std::string& group) const {
  Vec3 acc;
  int n = 0;
  for (const auto& p : primitives) {
    if (p.group != group) continue;
    acc += p.kind == ScenePrimitive::Kind::Sphere ? p.center : (p.box_min + p.box_max) * 0.5;
    ++n;
  }
  if (n == 0) throw ValidationError("AnalyticScene: no primitives in group '" + group + "'");
  return acc / n;
}

std::pair<Vec3, Vec3> AnalyticScene::group_bbox(const std::string& group) const {
  Vec3 lo{1e30, 1e30, 1e30}, hi{-1e30, -1e30, -1e30};
  int n = 0;
  for (const auto& p : primitives) {
    if (p.group != group) continue;
    const Vec3 pmin = p.kind == ScenePrimitive::Kind::Sphere
                          ? p.center - Vec3{p.radius, p.radius, p.radius}
                          : p.box_min;
    const Vec3 pmax = p.kind == ScenePrimitive::Kind::Sphere
                          ? p.center + Vec3{p.radius, p.radius, p.radius}
                          : p.box_max;
    lo = cwise_min(lo, pmin);
    hi = cwise_max(hi, pmax);
    ++n;
  }
  if (n == 0) throw ValidationError("AnalyticScene: no primitives in group '" + group + "'");
  return {lo, hi};
}

AnalyticScene AnalyticScene::without_group(const std::string& group) const {
  AnalyticScene out;
  out.background_rgb = background_rgb;
  for (const auto& p : primitives)
    if (p.group != group) out.primitives.push_back(p);
  return out;
}

AnalyticScene AnalyticScene::with_group_moved(const std::string& group,
                                              const Se3Pose& motion) const {
  AnalyticScene out;
  out.background_rgb = background_rgb;
  for (const auto& p : primitives)
    out.primitives.push_back(p.group == group ? p.transformed(motion) : p);
  return out;
}

AnalyticScene AnalyticScene::object_frame_scene(const Se3Pose& object_to_world) const {
  AnalyticScene out;
  out.background_rgb = {0.0, 0.0, 0.0};
  const Se3Pose world_to_object = invert(object_to_world);
  for (const auto& p : primitives)
    if (p.group == "object") out.primitives.push_back(p.transformed(world_to_object));
  if (out.primitives.empty())
    throw ValidationError("AnalyticScene: no 'object' group to re-express");
  return out;
}

AnalyticScene AnalyticScene::with_object_replaced(
    const std::vector<ScenePrimitive>& object_frame_prims, const Se3Pose& object_to_world) const {
  AnalyticScene out = without_group("object");
  for (const auto& p : object_frame_prims) {
    ScenePrimitive placed = p.transformed(object_to_world);
    placed.group = "object";
    out.primitives.push_back(placed);
  }
  return out;
}

const Image* AnalyticRenderResult::mask_for(const std::string& group) const {
  for (const auto& [name, mask] : group_masks)
    if (name == group) return &mask;
  return nullptr;
}

namespace {

constexpr int kMaxPrims = 32;
constexpr int kMaxGroups = 8;

struct ShadeResult {
  Vec3 rgb;
  double opacity;
  double group_opacity[kMaxGroups];
};

// Event sweep over the piecewise-constant density along the ray. Within a
// segment the total density and emission color are constant, so the
// transmittance factor is a single exponential and the integral is exact.
ShadeResult shade_ray(const AnalyticScene& scene, const Ray& ray,
                      const int* prim_group, int n_groups) {
  ShadeResult out{scene.background_rgb, 0.0, {}};
  for (int g = 0; g < n_groups; ++g) out.group_opacity[g] = 0.0;

  const int n = static_cast<int>(scene.primitives.size());
  double event_t[2 * kMaxPrims];
  int event_prim[2 * kMaxPrims];  // +idx enter, -(idx+1) exit
  int n_events = 0;
  for (int i = 0; i < n; ++i) {
    double t0, t1;
    if (!scene.primitives[static_cast<size_t>(i)].intersect(ray, &t0, &t1)) continue;
    event_t[n_events] = t0;
    event_prim[n_events++] = i;
    event_t[n_events] = t1;
    event_prim[n_events++] = -(i + 1);
  }
  if (n_events == 0) return out;

  // insertion sort by t; event counts are tiny
  for (int i = 1; i < n_events; ++i) {
    const double t = event_t[i];
    const int p = event_prim[i];
    int j = i - 1;
    while (j >= 0 && event_t[j] > t) {
      event_t[j + 1] = event_t[j];
      event_prim[j + 1] = event_prim[j];
      --j;
    }
    event_t[j + 1] = t;
    event_prim[j + 1] = p;
  }

  bool active[kMaxPrims] = {};
  double transmittance = 1.0;
  Vec3 rgb{0.0, 0.0, 0.0};
  double prev_t = event_t[0];
  for (int e = 0; e < n_events; ++e) {
    const double t = event_t[e];
    const double len = t - prev_t;
    if (len > 0.0) {
      double sigma_total = 0.0;
      Vec3 emission{0.0, 0.0, 0.0};
      double sigma_group[kMaxGroups] = {};
      for (int i = 0; i < n; ++i) {
        if (!active[i]) continue;
        const ScenePrimitive& p = scene.primitives[static_cast<size_t>(i)];
        sigma_total += p.density;
        emission += p.rgb * p.density;
        sigma_group[prim_group[i]] += p.density;
      }
      if (sigma_total > 0.0) {
        const double trans_seg = std::exp(-sigma_total * len);
        const double w = transmittance * (1.0 - trans_seg);
        rgb += emission * (w / sigma_total);
        out.opacity += w;
        for (int g = 0; g < n_groups; ++g)
          out.group_opacity[g] += w * (sigma_group[g] / sigma_total);
        transmittance *= trans_seg;
      }
    }
    const int p = event_prim[e];
    if (p >= 0)
      active[p] = true;
    else
      active[-p - 1] = false;
    prev_t = t;
  }

  out.rgb = rgb + scene.background_rgb * transmittance;
  return out;
}

AnalyticRenderResult render_impl(const AnalyticScene& scene, const PinholeCamera& cam,
                                 const Se3Pose& camera_pose, bool parallel) {
  scene.validate();
  cam.validate();
  if (scene.primitives.size() > kMaxPrims)
    throw ValidationError("analytic_render: too many primitives");

  std::vector<std::string> group_names;
  for (const auto& p : scene.primitives) group_names.push_back(p.group);
  std::sort(group_names.begin(), group_names.end());
  group_names.erase(std::unique(group_names.begin(), group_names.end()), group_names.end());
  const int n_groups = static_cast<int>(group_names.size());

  int prim_group[kMaxPrims] = {};
  for (size_t i = 0; i < scene.primitives.size(); ++i)
    prim_group[i] = static_cast<int>(
        std::lower_bound(group_names.begin(), group_names.end(), scene.primitives[i].group) -
        group_names.begin());

  AnalyticRenderResult out;
  out.rgb = Image::create(cam.width, cam.height, 3);
  out.opacity = Image::create(cam.width, cam.height, 1);
  for (const auto& name : group_names)
    out.group_masks.emplace_back(name, Image::create(cam.width, cam.height, 1));

  const int h = cam.height, w = cam.width;
#pragma omp parallel for schedule(static) if (parallel)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Ray ray = generate_ray(cam, camera_pose, x, y);
      const ShadeResult shade = shade_ray(scene, ray, prim_group, n_groups);
      out.rgb.at(x, y, 0) = static_cast<float>(shade.rgb.x);
      out.rgb.at(x, y, 1) = static_cast<float>(shade.rgb.y);
      out.rgb.at(x, y, 2) = static_cast<float>(shade.rgb.z);
      out.opacity.at(x, y, 0) = static_cast<float>(shade.opacity);
      for (int g = 0; g < n_groups; ++g)
        out.group_masks[static_cast<size_t>(g)].second.at(x, y, 0) =
            shade.group_opacity[g] > 0.5 ? 1.0f : 0.0f;
    }
  }
  return out;
}

}  // namespace

AnalyticRenderResult analytic_render(const AnalyticScene& scene, const PinholeCamera& cam,
                                     const Se3Pose& camera_pose) {
  return render_impl(scene, cam, camera_pose, true);
}

AnalyticRenderResult analytic_render_serial(const AnalyticScene& scene, const PinholeCamera& cam,
                                            const Se3Pose& camera_pose) {
  return render_impl(scene, cam, camera_pose, false);
}

Se3Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 forward = normalized(target - eye);
  Vec3 up_hint = up;
  if (norm(cross(forward, up_hint)) < 1e-6) up_hint = {0.0, 1.0, 0.0};
  const Vec3 right = normalized(cross(forward, up_hint));
  const Vec3 true_up = cross(right, forward);
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    r(i, 0) = right[i];
    r(i, 1) = true_up[i];
    r(i, 2) = -forward[i];
  }
  return Se3Pose(r, eye);
}

PosedImageDataset generate_posed_dataset(const AnalyticScene& scene, const PinholeCamera& cam,
                                         int n_views, const OrbitSpec& orbit, uint64_t seed) {
  if (n_views < 1) throw ValidationError("generate_posed_dataset: n_views must be >= 1");
  if (orbit.elevations_deg.empty())
    throw ValidationError("generate_posed_dataset: no elevations");
  scene.validate();
  cam.validate();

  const Vec3 target = scene.has_group("object")
                          ? scene.group_centroid("object")
                          : Vec3{0.0, 0.0, 0.0};

  PosedImageDataset dataset;
  dataset.cam = cam;
  RngStream rng(mix_key(seed, 0x6f726269ULL));  // "orbi"
  const double az0 = rng.u01();
  constexpr double kGolden = 0.61803398874989484;
  for (int i = 0; i < n_views; ++i) {
    const double az = 2.0 * M_PI * std::fmod(az0 + kGolden * i, 1.0);
    const double el = orbit.elevations_deg[static_cast<size_t>(i) % orbit.elevations_deg.size()] *
                      M_PI / 180.0;
    const double radius = orbit.radius * (1.0 + orbit.radius_spread * (rng.u01() - 0.5));
    const Vec3 eye = target + Vec3{radius * std::cos(el) * std::cos(az),
                                   radius * std::cos(el) * std::sin(az), radius * std::sin(el)};
    const Se3Pose pose = look_at(eye, target);
    dataset.frames.push_back({analytic_render(scene, cam, pose).rgb, pose});
  }
  return dataset;
}

void DemoSpec::validate() const {
  if (waypoints.empty()) throw ValidationError("DemoSpec: no waypoints");
  if (timesteps < 2) throw ValidationError("DemoSpec: timesteps must be >= 2");
  if (t_grasp < 0 || t_grasp >= timesteps)
    throw ValidationError("DemoSpec: t_grasp outside [0, timesteps)");
}

Se3Pose DemoSpec::gripper_at(int t) const {
  if (t < 0 || t >= timesteps) throw std::out_of_range("DemoSpec::gripper_at: t out of range");
  const int n_way = static_cast<int>(waypoints.size());
  if (n_way == 1) return waypoints[0];
  const double s = static_cast<double>(t) / (timesteps - 1) * (n_way - 1);
  int seg = static_cast<int>(s);
  if (seg > n_way - 2) seg = n_way - 2;
  const double u = s - seg;
  const Se3Pose& a = waypoints[static_cast<size_t>(seg)];
  const Se3Pose& b = waypoints[static_cast<size_t>(seg) + 1];
  return Se3Pose(rotation_slerp(a.rotation(), b.rotation(), u),
                 a.translation() * (1.0 - u) + b.translation() * u);
}

namespace {

// XYZ-roll/pitch/yaw of R = Rz(yaw) Ry(pitch) Rx(roll).
Vec3 euler_xyz(const Mat3& r) {
  const double sp = -r(2, 0);
  if (std::fabs(sp) > 1.0 - 1e-12) {
    const double pitch = sp > 0.0 ? M_PI / 2.0 : -M_PI / 2.0;
    return {std::atan2(-r(1, 2), r(1, 1)), pitch, 0.0};
  }
  return {std::atan2(r(2, 1), r(2, 2)), std::asin(sp), std::atan2(r(1, 0), r(0, 0))};
}

}  // namespace

Trajectory generate_demo_trajectory(const AnalyticScene& scene, const DemoSpec& spec,
                                    const PinholeCamera& cam) {
  spec.validate();
  scene.validate();
  cam.validate();
  if (!scene.has_group("object"))
    throw ValidationError("generate_demo_trajectory: scene has no 'object' group");

  Trajectory traj;
  traj.cam = cam;
  traj.camera_offset = spec.camera_offset;
  traj.object_to_world = spec.object_to_world;
  traj.t_grasp = spec.t_grasp;

  std::vector<Se3Pose> gripper(static_cast<size_t>(spec.timesteps));
  for (int t = 0; t < spec.timesteps; ++t) gripper[static_cast<size_t>(t)] = spec.gripper_at(t);
  const Se3Pose grasp_offset =
      compose(invert(gripper[static_cast<size_t>(spec.t_grasp)]), spec.object_to_world);

  for (int t = 0; t < spec.timesteps; ++t) {
    const Se3Pose& g = gripper[static_cast<size_t>(t)];
    const Se3Pose cam_pose = camera_to_world(g, spec.camera_offset);

    AnalyticRenderResult render;
    if (t < spec.t_grasp) {
      render = analytic_render(scene, cam, cam_pose);
    } else {
      const Se3Pose object_pose = compose(g, grasp_offset);
      const Se3Pose motion = compose(object_pose, invert(spec.object_to_world));
      render = analytic_render(scene.with_group_moved("object", motion), cam, cam_pose);
    }

    TrajectoryStep step;
    step.frame = std::move(render.rgb);
    step.gripper_pose = g;
    step.action = {};
    traj.steps.push_back(std::move(step));
    const Image* mask = render.mask_for("object");
    traj.object_masks.push_back(mask ? *mask : Image::create(cam.width, cam.height, 1));
  }

  for (int t = 0; t < spec.timesteps; ++t) {
    Action a{};
    if (t + 1 < spec.timesteps) {
      const Se3Pose& g0 = gripper[static_cast<size_t>(t)];
      const Se3Pose& g1 = gripper[static_cast<size_t>(t) + 1];
      const Vec3 dt = g1.translation() - g0.translation();
      const Vec3 drpy = euler_xyz(g0.rotation().transposed() * g1.rotation());
      a = {dt.x, dt.y, dt.z, drpy.x, drpy.y, drpy.z, 0.0};
    }
    a[6] = t >= spec.t_grasp ? 1.0 : 0.0;
    traj.steps[static_cast<size_t>(t)].action = a;
  }

  traj.validate();
  return traj;
}

AnalyticScene make_scene_preset(const std::string& name) {
  AnalyticScene scene;
  if (name == "sphere") {
    scene.background_rgb = {0.0, 0.0, 0.0};
    scene.primitives.push_back(
        ScenePrimitive::sphere({0.0, 0.0, 0.0}, 0.12, 3000.0, {0.85, 0.3, 0.25}, "object"));
  } else if (name == "mug-proxy") {
    scene.background_rgb = {0.0, 0.0, 0.0};
    scene.primitives.push_back(
        ScenePrimitive::sphere({0.0, 0.0, 0.0}, 0.10, 3000.0, {0.25, 0.45, 0.8}, "object"));
    scene.primitives.push_back(ScenePrimitive::box({0.09, -0.025, -0.05}, {0.16, 0.025, 0.05},
                                                   3000.0, {0.3, 0.5, 0.85}, "object"));
  } else if (name == "workspace") {
    scene.background_rgb = {0.08, 0.09, 0.11};
    scene.primitives.push_back(ScenePrimitive::box({-0.45, -0.35, -0.04}, {0.45, 0.35, 0.0},
                                                   3000.0, {0.55, 0.45, 0.33}, "background"));
    scene.primitives.push_back(ScenePrimitive::box({-0.35, 0.08, 0.0}, {-0.16, 0.30, 0.12},
                                                   3000.0, {0.35, 0.37, 0.42}, "background"));
    scene.primitives.push_back(ScenePrimitive::box({0.20, -0.30, 0.0}, {0.40, -0.12, 0.16},
                                                   3000.0, {0.30, 0.42, 0.36}, "background"));
    scene.primitives.push_back(
        ScenePrimitive::sphere({0.05, 0.0, 0.05}, 0.05, 3000.0, {0.8, 0.2, 0.2}, "object"));
  } else {
    throw ValidationError("make_scene_preset: unknown preset '" + name + "'");
  }
  return scene;
}

DemoSpec make_demo_preset(const std::string& name, const AnalyticScene& scene) {
  const Vec3 target = scene.group_centroid("object");
  DemoSpec spec;
  spec.object_to_world = Se3Pose::from_translation(target);
  if (name == "pick-lift") {
    const Vec3 e0 = target + Vec3{0.0, -0.48, 0.40};
    const Vec3 e1 = target + Vec3{0.0, -0.20, 0.12};
    const Se3Pose w1 = look_at(e1, target);
    spec.waypoints = {look_at(e0, target), w1, w1,
                      Se3Pose(w1.rotation(), e1 + Vec3{0.0, 0.0, 0.28})};
    spec.timesteps = 50;
    spec.t_grasp = 20;
    spec.camera_offset = Se3Pose::from_translation({0.0, 0.02, -0.01});
  } else if (name == "approach") {
    const Vec3 e0 = target + Vec3{0.0, -0.50, 0.34};
    const Vec3 e1 = target + (e0 - target) * 0.38;
    spec.waypoints = {look_at(e0, target), look_at(e1, target)};
    spec.timesteps = 12;
    spec.t_grasp = 11;
    spec.camera_offset = Se3Pose::identity();
  } else {
    throw ValidationError("make_demo_preset: unknown preset '" + name + "'");
  }
  return spec;
}

PinholeCamera make_default_camera(int width, int height, double fov_deg) {
  PinholeCamera cam;
  cam.width = width;
  cam.height = height;
  cam.fx = cam.fy = 0.5 * width / std::tan(0.5 * fov_deg * M_PI / 180.0);
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  cam.validate();
  return cam;
}

namespace {

json pose_to_json(const Se3Pose& p) {
  const auto m = p.as_matrix();
  return json(m);
}

Se3Pose pose_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 16)
    throw FormatError("expected 16-number row-major matrix for " + what);
  std::array<double, 16> m{};
  for (size_t i = 0; i < 16; ++i) m[i] = j[i].get<double>();
  return Se3Pose::from_matrix(m);
}

json vec_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw FormatError("expected 3-vector for " + what);
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw FormatError("invalid JSON in '" + path + "': " + e.what());
  }
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("short write to '" + path + "'");
}

void check_schema_version(const json& j, const std::string& path) {
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
      j["schema_version"].get<int>() != 1)
    throw FormatError("'" + path + "': unknown or missing schema_version (expected 1)");
}

}  // namespace

AnalyticScene load_scene_json(const std::string& path) {
  const json j = read_json_file(path);
  check_schema_version(j, path);
  AnalyticScene scene;
  scene.background_rgb = vec_from_json(j.at("background_rgb"), "background_rgb");
  for (const auto& pj : j.at("primitives")) {
    const std::string shape = pj.at("shape").get<std::string>();
    const double density = pj.at("density").get<double>();
    const Vec3 rgb = vec_from_json(pj.at("rgb"), "primitive rgb");
    const std::string group = pj.at("group").get<std::string>();
    if (shape == "sphere") {
      scene.primitives.push_back(ScenePrimitive::sphere(
          vec_from_json(pj.at("center"), "center"), pj.at("radius").get<double>(), density, rgb,
          group));
    } else if (shape == "box") {
      scene.primitives.push_back(ScenePrimitive::box(vec_from_json(pj.at("min"), "min"),
                                                     vec_from_json(pj.at("max"), "max"), density,
                                                     rgb, group));
    } else {
      throw FormatError("'" + path + "': unknown primitive shape '" + shape + "'");
    }
  }
  scene.validate();
  return scene;
}

void save_scene_json(const AnalyticScene& scene, const std::string& path) {
  json prims = json::array();
  for (const auto& p : scene.primitives) {
    json pj;
    if (p.kind == ScenePrimitive::Kind::Sphere) {
      pj["shape"] = "sphere";
      pj["center"] = vec_to_json(p.center);
      pj["radius"] = p.radius;
    } else {
      pj["shape"] = "box";
      pj["min"] = vec_to_json(p.box_min);
      pj["max"] = vec_to_json(p.box_max);
    }
    pj["density"] = p.density;
    pj["rgb"] = vec_to_json(p.rgb);
    pj["group"] = p.group;
    prims.push_back(pj);
  }
  write_json_file(
      json{{"schema_version", 1}, {"background_rgb", vec_to_json(scene.background_rgb)},
           {"primitives", prims}},
      path);
}

DemoSpec load_demo_json(const std::string& path) {
  const json j = read_json_file(path);
  check_schema_version(j, path);
  DemoSpec spec;
  spec.timesteps = j.at("timesteps").get<int>();
  spec.t_grasp = j.at("t_grasp").get<int>();
  spec.camera_offset = pose_from_json(j.at("camera_offset"), "camera_offset");
  spec.object_to_world = pose_from_json(j.at("object_to_world"), "object_to_world");
  for (const auto& wj : j.at("waypoints")) spec.waypoints.push_back(pose_from_json(wj, "waypoint"));
  spec.validate();
  return spec;
}

void save_demo_json(const DemoSpec& spec, const std::string& path) {
  json waypoints = json::array();
  for (const auto& w : spec.waypoints) waypoints.push_back(pose_to_json(w));
  write_json_file(json{{"schema_version", 1},
                       {"timesteps", spec.timesteps},
                       {"t_grasp", spec.t_grasp},
                       {"camera_offset", pose_to_json(spec.camera_offset)},
                       {"object_to_world", pose_to_json(spec.object_to_world)},
                       {"waypoints", waypoints}},
                  path);
}

}  // namespace voxaug
