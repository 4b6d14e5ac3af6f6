// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxaug/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "voxaug/composite.hpp"
#include "voxaug/errors.hpp"
#include "voxaug/rng.hpp"
#include "voxaug/segment.hpp"

namespace voxaug {

namespace fs = std::filesystem;
using nlohmann::json;

void AugmentConfig::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("AugmentConfig: tau outside [0, 1]");
  if (noise.sigma_rot < 0.0 || noise.sigma_trans < 0.0)
    throw ValidationError("AugmentConfig: negative noise sigma");
  object_render.validate();
  background_render.validate();
  if (!(segment_threshold > 0.0))
    throw ValidationError("AugmentConfig: segment_threshold must be > 0");
  if (segment_min_blob < 0) throw ValidationError("AugmentConfig: negative segment_min_blob");
  if (dilate_radius < 0) throw ValidationError("AugmentConfig: negative dilate_radius");
  if (output_width <= 0 || output_height <= 0)
    throw ValidationError("AugmentConfig: non-positive output resolution");
}

Trajectory augment_trajectory(const Trajectory& demo, const VoxelField& object_field,
                              const VoxelField& background_field, const AugmentConfig& cfg) {
  demo.validate();
  cfg.validate();

  const int n_steps = static_cast<int>(demo.steps.size());
  const std::vector<Se3Pose> gripper = demo.gripper_poses();

  const bool use_gt =
      cfg.mask_source == AugmentConfig::MaskSource::GroundTruth ||
      (cfg.mask_source == AugmentConfig::MaskSource::Auto && !demo.object_masks.empty());
  if (use_gt && demo.object_masks.empty())
    throw ValidationError("augment_trajectory: ground-truth masks requested but absent");

  // Pose chain first; frames are independent once the poses are fixed.
  std::vector<Se3Pose> relative(static_cast<size_t>(n_steps));
  for (int t = 0; t < n_steps; ++t)
    relative[static_cast<size_t>(t)] = camera_to_object_at(
        gripper, demo.object_to_world, demo.camera_offset, t, demo.t_grasp);
  if (cfg.noise.mode == NoiseConfig::Mode::PerTrajectory) {
    for (int t = demo.t_grasp; t < n_steps; ++t)
      relative[static_cast<size_t>(t)] =
          perturb_pose(relative[static_cast<size_t>(t)], cfg.noise.sigma_rot,
                       cfg.noise.sigma_trans, cfg.noise.seed);
  } else if (cfg.noise.mode == NoiseConfig::Mode::PerTimestep) {
    for (int t = demo.t_grasp; t < n_steps; ++t)
      relative[static_cast<size_t>(t)] =
          perturb_pose(relative[static_cast<size_t>(t)], cfg.noise.sigma_rot,
                       cfg.noise.sigma_trans,
                       mix_key(cfg.noise.seed, static_cast<uint64_t>(t)));
  }

  Trajectory out;
  out.cam = demo.cam;
  out.camera_offset = demo.camera_offset;
  out.object_to_world = demo.object_to_world;
  out.t_grasp = demo.t_grasp;
  out.steps.resize(static_cast<size_t>(n_steps));
  out.object_masks.resize(static_cast<size_t>(n_steps));

  const bool resize_output =
      cfg.output_width != demo.cam.width || cfg.output_height != demo.cam.height;

  for (int t = 0; t < n_steps; ++t) {
    const auto& step = demo.steps[static_cast<size_t>(t)];

    // (b) novel object at the original object's relative pose
    const RenderOutput novel =
        render_image(object_field, demo.cam, relative[static_cast<size_t>(t)], cfg.object_render);
    // (c) novel-object mask
    const Image m_nerf = opacity_to_mask(novel.opacity, cfg.tau);
    // (d) original-object mask
    const Se3Pose cam_pose = camera_to_world(step.gripper_pose, demo.camera_offset);
    const RenderOutput background =
        render_image(background_field, demo.cam, cam_pose, cfg.background_render);
    Image original_mask =
        use_gt ? demo.object_masks[static_cast<size_t>(t)]
               : segment_by_background(step.frame, background.rgb, cfg.segment_threshold,
                                       cfg.segment_min_blob);
    original_mask = dilate_mask(original_mask, cfg.dilate_radius);
    // (e) erase the original object
    const Image no_object = inpaint_background(step.frame, original_mask, background.rgb);
    // (f) Eq-style convex blend
    Image final_frame = blend(novel.rgb, cfg.soft_mask ? novel.opacity : m_nerf, no_object);

    if (resize_output) final_frame = resize_area(final_frame, cfg.output_width, cfg.output_height);

    auto& out_step = out.steps[static_cast<size_t>(t)];
    out_step.frame = std::move(final_frame);
    out_step.gripper_pose = step.gripper_pose;
    out_step.action = step.action;  // bytes preserved
    out.object_masks[static_cast<size_t>(t)] =
        resize_output ? opacity_to_mask(resize_area(novel.opacity, cfg.output_width,
                                                    cfg.output_height),
                        cfg.tau)
                      : m_nerf;
  }

  if (resize_output) {
    const double sx = static_cast<double>(cfg.output_width) / demo.cam.width;
    const double sy = static_cast<double>(cfg.output_height) / demo.cam.height;
    out.cam.width = cfg.output_width;
    out.cam.height = cfg.output_height;
    out.cam.fx *= sx;
    out.cam.fy *= sy;
    out.cam.cx *= sx;
    out.cam.cy *= sy;
  }

  return out;
}

namespace {

std::string frame_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d.png", index);
  return buf;
}

json camera_to_json(const PinholeCamera& cam) {
  return json{{"width", cam.width}, {"height", cam.height}, {"fx", cam.fx},
              {"fy", cam.fy},       {"cx", cam.cx},          {"cy", cam.cy}};
}

PinholeCamera camera_from_json(const json& j) {
  PinholeCamera cam;
  cam.width = j.at("width").get<int>();
  cam.height = j.at("height").get<int>();
  cam.fx = j.at("fx").get<double>();
  cam.fy = j.at("fy").get<double>();
  cam.cx = j.at("cx").get<double>();
  cam.cy = j.at("cy").get<double>();
  cam.validate();
  return cam;
}

json pose_to_json16(const Se3Pose& p) { return json(p.as_matrix()); }

Se3Pose pose_from_json16(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 16)
    throw FormatError("expected 16-number row-major matrix for " + what);
  std::array<double, 16> m{};
  for (size_t i = 0; i < 16; ++i) m[i] = j[i].get<double>();
  return Se3Pose::from_matrix(m);
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

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw FormatError("actions.csv: bad number '" + s + "' in " + where);
  return v;
}

}  // namespace

void write_trajectory(const Trajectory& traj, const std::string& dir) {
  traj.validate();
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "frames", ec);
  if (ec) throw IoError("write_trajectory: cannot create '" + dir + "': " + ec.message());
  if (!traj.object_masks.empty()) fs::create_directories(fs::path(dir) / "masks");

  write_json_file(json{{"schema_version", 1},
                       {"t_grasp", traj.t_grasp},
                       {"camera", camera_to_json(traj.cam)},
                       {"camera_offset", pose_to_json16(traj.camera_offset)},
                       {"object_to_world", pose_to_json16(traj.object_to_world)},
                       {"n_steps", traj.steps.size()}},
                  (fs::path(dir) / "meta.json").string());

  json poses = json::array();
  for (size_t i = 0; i < traj.steps.size(); ++i) {
    save_png(traj.steps[i].frame,
             (fs::path(dir) / "frames" / frame_name(static_cast<int>(i))).string());
    if (!traj.object_masks.empty())
      save_png(traj.object_masks[i],
               (fs::path(dir) / "masks" / frame_name(static_cast<int>(i))).string());
    poses.push_back(json{{"index", i},
                         {"gripper_to_world", pose_to_json16(traj.steps[i].gripper_pose)}});
  }
  write_json_file(json{{"schema_version", 1}, {"frames", poses}},
                  (fs::path(dir) / "poses.json").string());

  std::ofstream csv(fs::path(dir) / "actions.csv");
  if (!csv) throw IoError("write_trajectory: cannot open actions.csv in '" + dir + "'");
  csv << "t,dx,dy,dz,droll,dpitch,dyaw,grip\n";
  for (size_t i = 0; i < traj.steps.size(); ++i) {
    csv << i;
    for (const double a : traj.steps[i].action) csv << "," << fmt_double(a);
    csv << "\n";
  }
  if (!csv) throw IoError("write_trajectory: short write to actions.csv in '" + dir + "'");
}

Trajectory read_trajectory(const std::string& dir) {
  const std::string meta_path = (fs::path(dir) / "meta.json").string();
  if (!fs::exists(meta_path)) throw IoError("read_trajectory: missing '" + meta_path + "'");
  const json meta = read_json_file(meta_path);
  check_schema_version(meta, meta_path);

  Trajectory traj;
  traj.cam = camera_from_json(meta.at("camera"));
  traj.t_grasp = meta.at("t_grasp").get<int>();
  traj.camera_offset = pose_from_json16(meta.at("camera_offset"), "camera_offset");
  traj.object_to_world = pose_from_json16(meta.at("object_to_world"), "object_to_world");
  const int n_steps = meta.at("n_steps").get<int>();
  if (n_steps < 2) throw ValidationError("read_trajectory: n_steps must be >= 2");

  traj.steps.resize(static_cast<size_t>(n_steps));
  for (int i = 0; i < n_steps; ++i) {
    const fs::path frame_path = fs::path(dir) / "frames" / frame_name(i);
    if (!fs::exists(frame_path))
      throw ValidationError("read_trajectory: meta.json declares " + std::to_string(n_steps) +
                            " steps but frame " + frame_name(i) + " is missing");
    traj.steps[static_cast<size_t>(i)].frame = load_png(frame_path.string());
  }
  if (fs::exists(fs::path(dir) / "masks")) {
    traj.object_masks.resize(static_cast<size_t>(n_steps));
    for (int i = 0; i < n_steps; ++i) {
      const fs::path mask_path = fs::path(dir) / "masks" / frame_name(i);
      if (!fs::exists(mask_path))
        throw ValidationError("read_trajectory: masks/ exists but mask " + frame_name(i) +
                              " is missing");
      traj.object_masks[static_cast<size_t>(i)] = load_png(mask_path.string());
    }
  }

  const std::string poses_path = (fs::path(dir) / "poses.json").string();
  const json poses = read_json_file(poses_path);
  if (static_cast<int>(poses.at("frames").size()) != n_steps)
    throw ValidationError("read_trajectory: poses.json lists " +
                          std::to_string(poses.at("frames").size()) + " frames, meta.json " +
                          std::to_string(n_steps));
  for (const auto& fj : poses.at("frames")) {
    const int idx = fj.at("index").get<int>();
    if (idx < 0 || idx >= n_steps)
      throw ValidationError("read_trajectory: pose index " + std::to_string(idx) +
                            " out of range");
    traj.steps[static_cast<size_t>(idx)].gripper_pose =
        pose_from_json16(fj.at("gripper_to_world"), "gripper_to_world");
  }

  const std::string csv_path = (fs::path(dir) / "actions.csv").string();
  std::ifstream csv(csv_path);
  if (!csv) throw IoError("read_trajectory: missing '" + csv_path + "'");
  std::string line;
  if (!std::getline(csv, line) || line != "t,dx,dy,dz,droll,dpitch,dyaw,grip")
    throw FormatError("actions.csv: unexpected header");
  int rows = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8)
      throw FormatError("actions.csv: expected 8 columns, got " + std::to_string(cells.size()));
    const int t = static_cast<int>(parse_double(cells[0], "column t"));
    if (t < 0 || t >= n_steps)
      throw ValidationError("actions.csv: timestep " + std::to_string(t) + " out of range");
    for (int c = 0; c < 7; ++c)
      traj.steps[static_cast<size_t>(t)].action[static_cast<size_t>(c)] =
          parse_double(cells[static_cast<size_t>(c) + 1], "row " + std::to_string(t));
    ++rows;
  }
  if (rows != n_steps)
    throw ValidationError("actions.csv: " + std::to_string(rows) + " rows for " +
                          std::to_string(n_steps) + " steps");

  traj.validate();
  return traj;
}

void write_posed_dataset(const PosedImageDataset& dataset, const std::string& dir,
                         const Vec3* bbox_min, const Vec3* bbox_max) {
  dataset.validate();
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "frames", ec);
  if (ec) throw IoError("write_posed_dataset: cannot create '" + dir + "': " + ec.message());

  json meta{{"schema_version", 1},
            {"camera", camera_to_json(dataset.cam)},
            {"n_frames", dataset.frames.size()}};
  if (bbox_min && bbox_max) {
    meta["suggested_bbox_min"] = json::array({bbox_min->x, bbox_min->y, bbox_min->z});
    meta["suggested_bbox_max"] = json::array({bbox_max->x, bbox_max->y, bbox_max->z});
  }
  write_json_file(meta, (fs::path(dir) / "meta.json").string());

  json poses = json::array();
  for (size_t i = 0; i < dataset.frames.size(); ++i) {
    save_png(dataset.frames[i].image,
             (fs::path(dir) / "frames" / frame_name(static_cast<int>(i))).string());
    poses.push_back(json{{"index", i},
                         {"camera_to_world", pose_to_json16(dataset.frames[i].camera_to_world)}});
  }
  write_json_file(json{{"schema_version", 1}, {"frames", poses}},
                  (fs::path(dir) / "poses.json").string());
}

PosedImageDataset read_posed_dataset(const std::string& dir) {
  const std::string meta_path = (fs::path(dir) / "meta.json").string();
  if (!fs::exists(meta_path)) throw IoError("read_posed_dataset: missing '" + meta_path + "'");
  const json meta = read_json_file(meta_path);
  check_schema_version(meta, meta_path);

  PosedImageDataset dataset;
  dataset.cam = camera_from_json(meta.at("camera"));
  const int n = meta.at("n_frames").get<int>();
  if (n < 1) throw ValidationError("read_posed_dataset: n_frames must be >= 1");

  const json poses = read_json_file((fs::path(dir) / "poses.json").string());
  if (static_cast<int>(poses.at("frames").size()) != n)
    throw ValidationError("read_posed_dataset: poses.json frame count disagrees with meta.json");

  dataset.frames.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const fs::path frame_path = fs::path(dir) / "frames" / frame_name(i);
    if (!fs::exists(frame_path))
      throw ValidationError("read_posed_dataset: meta.json declares " + std::to_string(n) +
                            " frames but " + frame_name(i) + " is missing");
    dataset.frames[static_cast<size_t>(i)].image = load_png(frame_path.string());
  }
  for (const auto& fj : poses.at("frames")) {
    const int idx = fj.at("index").get<int>();
    if (idx < 0 || idx >= n)
      throw ValidationError("read_posed_dataset: pose index out of range");
    dataset.frames[static_cast<size_t>(idx)].camera_to_world =
        pose_from_json16(fj.at("camera_to_world"), "camera_to_world");
  }
  dataset.validate();
  return dataset;
}

bool read_dataset_bbox_hint(const std::string& dir, Vec3* bbox_min, Vec3* bbox_max) {
  const json meta = read_json_file((fs::path(dir) / "meta.json").string());
  if (!meta.contains("suggested_bbox_min") || !meta.contains("suggested_bbox_max")) return false;
  const auto& lo = meta["suggested_bbox_min"];
  const auto& hi = meta["suggested_bbox_max"];
  *bbox_min = {lo[0].get<double>(), lo[1].get<double>(), lo[2].get<double>()};
  *bbox_max = {hi[0].get<double>(), hi[1].get<double>(), hi[2].get<double>()};
  return true;
}

EvalReport evaluate_augmentation(const Trajectory& produced, const Trajectory& oracle) {
  if (produced.steps.size() != oracle.steps.size())
    throw ValidationError("evaluate_augmentation: trajectory lengths differ");
  const bool with_masks = !produced.object_masks.empty() && !oracle.object_masks.empty();

  EvalReport report;
  double sum = 0.0;
  for (size_t t = 0; t < produced.steps.size(); ++t) {
    double p = psnr_db(produced.steps[t].frame, oracle.steps[t].frame);
    if (p > kPsnrCapDb) p = kPsnrCapDb;
    report.frame_psnr_db.push_back(p);
    sum += p;
    if (with_masks)
      report.frame_mask_iou.push_back(mask_iou(produced.object_masks[t], oracle.object_masks[t]));
  }
  report.mean_psnr_db = sum / static_cast<double>(produced.steps.size());
  return report;
}

}  // namespace voxaug
