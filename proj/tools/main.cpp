// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0
//
// voxaug command-line tool: synthetic scene generation, voxel-field
// training, rendering, demonstration augmentation, evaluation, and a render
// throughput benchmark.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 I/O
// error. Diagnostics go to stderr; with --json each subcommand prints a
// single JSON document on stdout.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "voxaug/composite.hpp"
#include "voxaug/errors.hpp"
#include "voxaug/pipeline.hpp"
#include "voxaug/scene.hpp"
#include "voxaug/segment.hpp"
#include "voxaug/train.hpp"

using namespace voxaug;
using nlohmann::json;

namespace {

// flags > --config JSON > defaults: registered options the command line left
// untouched are filled from the config file.
class ConfigBinder {
 public:
  void bind(CLI::Option* opt, std::function<void(const json&)> apply) {
    entries_.push_back({opt, std::move(apply)});
  }

  void apply(const std::string& config_path) {
    if (config_path.empty()) return;
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open config '" + config_path + "'");
    json cfg;
    try {
      in >> cfg;
    } catch (const json::parse_error& e) {
      throw FormatError("invalid JSON in config '" + config_path + "': " + e.what());
    }
    for (auto& [opt, setter] : entries_) {
      if (opt->count() > 0) continue;
      const std::string name = opt->get_name(false, true);
      const std::string key = name.rfind("--", 0) == 0 ? name.substr(2) : name;
      if (cfg.contains(key)) setter(cfg[key]);
    }
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::function<void(const json&)> apply;
  };
  std::vector<Entry> entries_;
};

Vec3 parse_vec3(const std::string& csv, const std::string& what) {
  std::stringstream ss(csv);
  std::string cell;
  std::vector<double> vals;
  while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
  if (vals.size() != 3) throw ValidationError(what + ": expected 3 comma-separated numbers");
  return {vals[0], vals[1], vals[2]};
}

Se3Pose parse_pose16(const std::string& csv, const std::string& what) {
  std::stringstream ss(csv);
  std::string cell;
  std::vector<double> vals;
  while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
  if (vals.size() != 16) throw ValidationError(what + ": expected 16 comma-separated numbers");
  std::array<double, 16> m{};
  std::copy(vals.begin(), vals.end(), m.begin());
  return Se3Pose::from_matrix(m);
}

std::vector<double> parse_csv_doubles(const std::string& csv) {
  std::stringstream ss(csv);
  std::string cell;
  std::vector<double> vals;
  while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
  return vals;
}

void emit(const json& doc, bool as_json, const std::string& human) {
  if (as_json) {
    json out = doc;
    out["schema_version"] = 1;
    std::cout << out.dump(2) << "\n";
  } else if (!human.empty()) {
    std::cout << human << "\n";
  }
}

void set_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

struct SceneGenArgs {
  std::string preset = "sphere";
  std::string scene_json;
  std::string out;
  int views = 24;
  int size = 128;
  double fov = 50.0;
  double radius = 0.55;
  std::string elevations = "-25,5,30";
  uint64_t seed = 0;
  bool without_object = false;
  bool as_json = false;
};

int run_scene_gen(const SceneGenArgs& a) {
  AnalyticScene scene =
      a.scene_json.empty() ? make_scene_preset(a.preset) : load_scene_json(a.scene_json);
  if (a.without_object) scene = scene.without_group("object");

  OrbitSpec orbit;
  orbit.radius = a.radius;
  orbit.elevations_deg = parse_csv_doubles(a.elevations);

  const PinholeCamera cam = make_default_camera(a.size, a.size, a.fov);
  const PosedImageDataset dataset = generate_posed_dataset(scene, cam, a.views, orbit, a.seed);

  // bbox hint for the trainer: padded bounds of the group the field will fit
  bool have_bbox = false;
  Vec3 lo, hi;
  const std::string bbox_group = a.without_object ? "background" : "object";
  if (scene.has_group(bbox_group)) {
    auto [glo, ghi] = scene.group_bbox(bbox_group);
    const Vec3 pad = (ghi - glo) * 0.15;
    lo = glo - pad;
    hi = ghi + pad;
    have_bbox = true;
  }
  write_posed_dataset(dataset, a.out, have_bbox ? &lo : nullptr, have_bbox ? &hi : nullptr);

  emit(json{{"dataset", a.out},
            {"n_frames", dataset.frames.size()},
            {"width", cam.width},
            {"height", cam.height}},
       a.as_json, "wrote " + std::to_string(dataset.frames.size()) + " posed frames to " + a.out);
  return 0;
}

struct SceneDemoArgs {
  std::string scene_preset = "workspace";
  std::string demo_preset = "pick-lift";
  std::string scene_json;
  std::string demo_json;
  std::string out;
  int steps = 0;     // 0 keeps the preset value
  int t_grasp = -1;  // <0 keeps the preset value
  int size = 128;
  double fov = 50.0;
  bool as_json = false;
};

int run_scene_demo(const SceneDemoArgs& a) {
  const AnalyticScene scene =
      a.scene_json.empty() ? make_scene_preset(a.scene_preset) : load_scene_json(a.scene_json);
  DemoSpec spec =
      a.demo_json.empty() ? make_demo_preset(a.demo_preset, scene) : load_demo_json(a.demo_json);
  if (a.steps > 0) spec.timesteps = a.steps;
  if (a.t_grasp >= 0) spec.t_grasp = a.t_grasp;

  const PinholeCamera cam = make_default_camera(a.size, a.size, a.fov);
  const Trajectory traj = generate_demo_trajectory(scene, spec, cam);
  write_trajectory(traj, a.out);

  emit(json{{"trajectory", a.out},
            {"n_steps", traj.steps.size()},
            {"t_grasp", traj.t_grasp},
            {"with_masks", !traj.object_masks.empty()}},
       a.as_json,
       "wrote " + std::to_string(traj.steps.size()) + "-step demo (t_grasp " +
           std::to_string(traj.t_grasp) + ") to " + a.out);
  return 0;
}

struct FieldTrainArgs {
  std::string data;
  std::string out;
  std::string report;
  int res = 64;
  int iters = 4000;
  int rays = 4096;
  int samples = 128;
  double lr = 0.05;
  double tv = 1e-4;
  double holdout = 0.0;
  double t_near = 0.02;
  double t_far = 2.5;
  uint64_t seed = 0;
  std::string bbox;
  int threads = 0;
  bool as_json = false;
};

int run_field_train(const FieldTrainArgs& a) {
  set_threads(a.threads);
  const PosedImageDataset dataset = read_posed_dataset(a.data);

  Vec3 lo{-0.2, -0.2, -0.2}, hi{0.2, 0.2, 0.2};
  if (!a.bbox.empty()) {
    const std::vector<double> vals = parse_csv_doubles(a.bbox);
    if (vals.size() != 6)
      throw ValidationError("--bbox: expected 6 comma-separated numbers (min xyz, max xyz)");
    lo = {vals[0], vals[1], vals[2]};
    hi = {vals[3], vals[4], vals[5]};
  } else if (!read_dataset_bbox_hint(a.data, &lo, &hi)) {
    std::cerr << "note: dataset carries no bbox hint, using the default object cube\n";
  }

  TrainConfig cfg;
  cfg.iterations = a.iters;
  cfg.rays_per_batch = a.rays;
  cfg.learning_rate = a.lr;
  cfg.tv_weight = a.tv;
  cfg.seed = a.seed;
  cfg.holdout_fraction = a.holdout;
  cfg.render.samples_per_ray = a.samples;
  cfg.render.t_near = a.t_near;
  cfg.render.t_far = a.t_far;

  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult result = train_field(dataset, lo, hi, a.res, a.res, a.res, cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  save_field(result.field, a.out);
  if (!a.report.empty()) write_train_report_jsonl(result.report, a.report);

  const auto& last = result.report.checkpoints.back();
  json doc{{"field", a.out},
           {"iterations", cfg.iterations},
           {"final_loss", last.loss},
           {"wall_seconds", wall},
           {"resolution", a.res}};
  if (!std::isnan(last.holdout_psnr_db)) doc["psnr_db"] = last.holdout_psnr_db;
  std::ostringstream human;
  human << "trained " << a.res << "^3 field in " << wall << " s, final loss " << last.loss;
  if (!std::isnan(last.holdout_psnr_db))
    human << ", holdout PSNR " << last.holdout_psnr_db << " dB";
  emit(doc, a.as_json, human.str());
  return 0;
}

struct FieldRenderArgs {
  std::string field;
  std::string pose;
  std::string look_from, look_to;
  std::string out;
  std::string opacity_out;
  std::string mask_out;
  double tau = 0.5;
  int size = 128;
  double fov = 50.0;
  int samples = 128;
  double t_near = 0.02;
  double t_far = 2.5;
  std::string bg = "0,0,0";
  bool stratified = false;
  uint64_t seed = 0;
  int threads = 0;
  bool as_json = false;
};

int run_field_render(const FieldRenderArgs& a) {
  set_threads(a.threads);
  const VoxelField field = load_field(a.field);
  Se3Pose pose;
  if (!a.pose.empty()) {
    pose = parse_pose16(a.pose, "--pose");
  } else if (!a.look_from.empty() && !a.look_to.empty()) {
    pose = look_at(parse_vec3(a.look_from, "--look-from"), parse_vec3(a.look_to, "--look-to"));
  } else {
    throw ValidationError("field render: pass --pose or --look-from/--look-to");
  }

  const PinholeCamera cam = make_default_camera(a.size, a.size, a.fov);
  RenderConfig cfg;
  cfg.samples_per_ray = a.samples;
  cfg.t_near = a.t_near;
  cfg.t_far = a.t_far;
  cfg.background_rgb = parse_vec3(a.bg, "--bg");
  cfg.stratified = a.stratified;
  cfg.seed = a.seed;

  const RenderOutput out = render_image(field, cam, pose, cfg);
  save_png(out.rgb, a.out);
  if (!a.opacity_out.empty()) save_png(out.opacity, a.opacity_out);
  if (!a.mask_out.empty()) save_png(opacity_to_mask(out.opacity, a.tau), a.mask_out);

  emit(json{{"image", a.out}, {"width", cam.width}, {"height", cam.height}}, a.as_json,
       "rendered " + a.out);
  return 0;
}

struct AugmentArgs {
  std::string demo;
  std::string object_field;
  std::string background_field;
  std::string out;
  double tau = 0.5;
  std::string noise_mode = "off";  // off | per-trajectory | per-timestep
  double sigma_rot = 0.0;
  double sigma_trans = 0.0;
  uint64_t noise_seed = 0;
  int samples = 128;
  double t_near = 0.02;
  double t_far = 2.5;
  std::string background_rgb = "0,0,0";
  std::string mask_source = "auto";  // auto | gt | segment
  double threshold = 0.05;
  int min_blob = 8;
  int dilate = 1;
  int out_size = 128;
  bool soft_mask = false;
  int threads = 0;
  bool as_json = false;
};

int run_augment(const AugmentArgs& a) {
  set_threads(a.threads);
  const Trajectory demo = read_trajectory(a.demo);
  const VoxelField object_field = load_field(a.object_field);
  const VoxelField background_field = load_field(a.background_field);

  AugmentConfig cfg;
  cfg.tau = a.tau;
  if (a.noise_mode == "off")
    cfg.noise.mode = NoiseConfig::Mode::Off;
  else if (a.noise_mode == "per-trajectory")
    cfg.noise.mode = NoiseConfig::Mode::PerTrajectory;
  else if (a.noise_mode == "per-timestep")
    cfg.noise.mode = NoiseConfig::Mode::PerTimestep;
  else
    throw ValidationError("--noise-mode: expected off, per-trajectory or per-timestep");
  cfg.noise.sigma_rot = a.sigma_rot;
  cfg.noise.sigma_trans = a.sigma_trans;
  cfg.noise.seed = a.noise_seed;
  cfg.object_render.samples_per_ray = a.samples;
  cfg.object_render.t_near = a.t_near;
  cfg.object_render.t_far = a.t_far;
  cfg.background_render = cfg.object_render;
  cfg.background_render.background_rgb = parse_vec3(a.background_rgb, "--background-rgb");
  if (a.mask_source == "auto")
    cfg.mask_source = AugmentConfig::MaskSource::Auto;
  else if (a.mask_source == "gt")
    cfg.mask_source = AugmentConfig::MaskSource::GroundTruth;
  else if (a.mask_source == "segment")
    cfg.mask_source = AugmentConfig::MaskSource::Segment;
  else
    throw ValidationError("--mask-source: expected auto, gt or segment");
  cfg.segment_threshold = a.threshold;
  cfg.segment_min_blob = a.min_blob;
  cfg.dilate_radius = a.dilate;
  cfg.soft_mask = a.soft_mask;
  cfg.output_width = cfg.output_height = a.out_size;

  const auto t0 = std::chrono::steady_clock::now();
  const Trajectory augmented = augment_trajectory(demo, object_field, background_field, cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_trajectory(augmented, a.out);

  emit(json{{"trajectory", a.out},
            {"n_steps", augmented.steps.size()},
            {"wall_seconds", wall},
            {"frames_per_second", static_cast<double>(augmented.steps.size()) / wall}},
       a.as_json,
       "augmented " + std::to_string(augmented.steps.size()) + " frames in " +
           std::to_string(wall) + " s -> " + a.out);
  return 0;
}

struct EvalPsnrArgs {
  std::string field;
  std::string data;
  bool holdout_only = false;
  double holdout_fraction = 0.125;
  uint64_t seed = 0;
  int samples = 128;
  double t_near = 0.02;
  double t_far = 2.5;
  std::string produced;
  std::string oracle;
  int threads = 0;
  bool as_json = false;
};

int run_eval_psnr(const EvalPsnrArgs& a) {
  set_threads(a.threads);
  if (!a.produced.empty() && !a.oracle.empty()) {
    const EvalReport report =
        evaluate_augmentation(read_trajectory(a.produced), read_trajectory(a.oracle));
    json doc{{"mean_psnr_db", report.mean_psnr_db}, {"frame_psnr_db", report.frame_psnr_db}};
    if (!report.frame_mask_iou.empty()) doc["frame_mask_iou"] = report.frame_mask_iou;
    emit(doc, a.as_json, "mean PSNR " + std::to_string(report.mean_psnr_db) + " dB");
    return 0;
  }
  if (a.field.empty() || a.data.empty())
    throw ValidationError("eval psnr: pass --field and --data, or --produced and --oracle");

  const VoxelField field = load_field(a.field);
  const PosedImageDataset dataset = read_posed_dataset(a.data);
  RenderConfig cfg;
  cfg.samples_per_ray = a.samples;
  cfg.t_near = a.t_near;
  cfg.t_far = a.t_far;

  std::vector<int> frames;
  if (a.holdout_only) {
    std::vector<int> train_idx;
    holdout_split(static_cast<int>(dataset.frames.size()), a.holdout_fraction, a.seed, &train_idx,
                  &frames);
  } else {
    for (size_t i = 0; i < dataset.frames.size(); ++i) frames.push_back(static_cast<int>(i));
  }
  if (frames.empty()) throw ValidationError("eval psnr: no frames selected");

  double se = 0.0;
  size_t n = 0;
  for (const int idx : frames) {
    const auto& frame = dataset.frames[static_cast<size_t>(idx)];
    const RenderOutput out = render_image(field, dataset.cam, frame.camera_to_world, cfg);
    for (size_t i = 0; i < out.rgb.data.size(); ++i) {
      const double d = static_cast<double>(out.rgb.data[i]) - frame.image.data[i];
      se += d * d;
    }
    n += out.rgb.data.size();
  }
  const double psnr = se == 0.0 ? kPsnrCapDb : -10.0 * std::log10(se / static_cast<double>(n));
  emit(json{{"psnr_db", psnr}, {"n_frames", frames.size()}, {"holdout", a.holdout_only}},
       a.as_json,
       "PSNR " + std::to_string(psnr) + " dB over " + std::to_string(frames.size()) + " frames");
  return 0;
}

struct EvalIouArgs {
  std::string produced, oracle;
  std::string a_png, b_png;
  bool as_json = false;
};

int run_eval_iou(const EvalIouArgs& a) {
  if (!a.a_png.empty() && !a.b_png.empty()) {
    const double iou = mask_iou(load_png(a.a_png), load_png(a.b_png));
    emit(json{{"iou", iou}}, a.as_json, "IoU " + std::to_string(iou));
    return 0;
  }
  if (a.produced.empty() || a.oracle.empty())
    throw ValidationError("eval iou: pass --produced and --oracle, or --a and --b");
  const Trajectory produced = read_trajectory(a.produced);
  const Trajectory oracle = read_trajectory(a.oracle);
  if (produced.object_masks.empty() || oracle.object_masks.empty())
    throw ValidationError("eval iou: both trajectories need masks");
  const EvalReport report = evaluate_augmentation(produced, oracle);
  double mean = 0.0;
  for (const double v : report.frame_mask_iou) mean += v;
  mean /= static_cast<double>(report.frame_mask_iou.size());
  emit(json{{"mean_iou", mean}, {"frame_iou", report.frame_mask_iou}}, a.as_json,
       "mean mask IoU " + std::to_string(mean));
  return 0;
}

struct EvalPoseArgs {
  std::string a, b;
  bool as_json = false;
};

int run_eval_pose(const EvalPoseArgs& args) {
  const Trajectory ta = read_trajectory(args.a);
  const Trajectory tb = read_trajectory(args.b);
  if (ta.steps.size() != tb.steps.size())
    throw ValidationError("eval pose: trajectory lengths differ");
  double max_trans = 0.0, max_rot = 0.0;
  for (size_t t = 0; t < ta.steps.size(); ++t) {
    const Se3Pose& pa = ta.steps[t].gripper_pose;
    const Se3Pose& pb = tb.steps[t].gripper_pose;
    max_trans = std::fmax(max_trans, norm(pa.translation() - pb.translation()));
    max_rot = std::fmax(max_rot, norm(rotation_log(pa.rotation().transposed() * pb.rotation())));
  }
  emit(json{{"max_translation_m", max_trans},
            {"max_rotation_rad", max_rot},
            {"t_grasp_equal", ta.t_grasp == tb.t_grasp},
            {"n_steps", ta.steps.size()}},
       args.as_json,
       "max pose deviation: " + std::to_string(max_trans) + " m, " + std::to_string(max_rot) +
           " rad");
  return 0;
}

struct BenchArgs {
  std::string field;
  int frames = 60;
  int size = 128;
  double fov = 50.0;
  int samples = 128;
  int threads = 0;
  std::string thread_list;
  bool compare_serial = false;
  bool as_json = false;
};

int run_bench(const BenchArgs& a) {
  const VoxelField field = load_field(a.field);
  if (a.frames < 1) throw ValidationError("bench render: --frames must be >= 1");
  const PinholeCamera cam = make_default_camera(a.size, a.size, a.fov);

  // distinct orbit poses around the field bbox; inputs are never modified
  const Vec3 center = (field.bbox_min + field.bbox_max) * 0.5;
  const double radius = 2.2 * 0.5 * norm(field.bbox_max - field.bbox_min);
  std::vector<Se3Pose> poses;
  for (int i = 0; i < a.frames; ++i) {
    const double az = 2.0 * M_PI * 0.61803398874989484 * i;
    const double el = 0.3 * std::sin(0.7 * i);
    poses.push_back(look_at(center + Vec3{radius * std::cos(el) * std::cos(az),
                                          radius * std::cos(el) * std::sin(az),
                                          radius * std::sin(el)},
                            center));
  }

  RenderConfig cfg;
  cfg.samples_per_ray = a.samples;
  cfg.t_near = 0.01;
  cfg.t_far = 2.0 * radius;

  auto measure = [&](int threads) {
    set_threads(threads);
    render_image(field, cam, poses[0], cfg);  // warm up
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& pose : poses) render_image(field, cam, pose, cfg);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  std::vector<int> thread_counts;
  if (!a.thread_list.empty()) {
    for (const double v : parse_csv_doubles(a.thread_list))
      thread_counts.push_back(static_cast<int>(v));
  } else {
    thread_counts.push_back(a.threads > 0 ? a.threads
                                          : static_cast<int>(std::thread::hardware_concurrency()));
  }

  json runs = json::array();
  std::string human;
  Image reference;
  bool deterministic = true;
  for (const int threads : thread_counts) {
    const double wall = measure(threads);
    const double fps = a.frames / wall;
    runs.push_back(json{{"threads", threads},
                        {"wall_seconds", wall},
                        {"frames_per_second", fps},
                        {"ms_per_frame", 1000.0 * wall / a.frames}});
    human += "threads " + std::to_string(threads) + ": " + std::to_string(fps) + " fps\n";
    const Image check = render_image(field, cam, poses[0], cfg).rgb;
    if (reference.data.empty())
      reference = check;
    else if (!images_equal_bits(reference, check))
      deterministic = false;
  }

  json doc{{"grid_resolution", json::array({field.nx, field.ny, field.nz})},
           {"samples_per_ray", a.samples},
           {"image_size", json::array({a.size, a.size})},
           {"n_frames", a.frames},
           {"hardware_threads", std::thread::hardware_concurrency()},
           {"bitwise_identical_across_thread_counts", deterministic},
           {"runs", runs}};
  if (a.compare_serial) {
    render_image_serial(field, cam, poses[0], cfg);  // warm up
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& pose : poses) render_image_serial(field, cam, pose, cfg);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    doc["serial_reference"] = json{{"wall_seconds", wall},
                                   {"frames_per_second", a.frames / wall},
                                   {"ms_per_frame", 1000.0 * wall / a.frames}};
    doc["serial_matches_parallel_bitwise"] =
        images_equal_bits(reference, render_image_serial(field, cam, poses[0], cfg).rgb);
    human += "serial reference: " + std::to_string(a.frames / wall) + " fps\n";
  }
  if (!human.empty()) human.pop_back();
  emit(doc, a.as_json, human);
  return 0;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"voxel radiance field data augmentation for gripper-camera demonstrations"};
  app.require_subcommand(1);

  SceneGenArgs scene_gen_args;
  SceneDemoArgs scene_demo_args;
  FieldTrainArgs train_args;
  FieldRenderArgs render_args;
  AugmentArgs augment_args;
  EvalPsnrArgs psnr_args;
  EvalIouArgs iou_args;
  EvalPoseArgs pose_args;
  BenchArgs bench_args;
  std::string train_config, augment_config, bench_config;
  ConfigBinder train_binder, augment_binder, bench_binder;
  int mode = 0;

  CLI::App* scene = app.add_subcommand("scene", "synthetic analytic scenes");
  scene->require_subcommand(1);
  CLI::App* sgen = scene->add_subcommand("gen", "generate a posed image dataset");
  sgen->add_option("--preset", scene_gen_args.preset,
                   "scene preset: sphere, mug-proxy, workspace");
  sgen->add_option("--scene-json", scene_gen_args.scene_json, "scene description file");
  sgen->add_option("--views", scene_gen_args.views, "number of views");
  sgen->add_option("--radius", scene_gen_args.radius, "orbit radius in meters");
  sgen->add_option("--elevations", scene_gen_args.elevations, "orbit elevations in degrees, csv");
  sgen->add_option("--size", scene_gen_args.size, "image width and height");
  sgen->add_option("--fov", scene_gen_args.fov, "field of view in degrees");
  sgen->add_option("--seed", scene_gen_args.seed, "orbit seed");
  sgen->add_flag("--without-object", scene_gen_args.without_object,
                 "drop the object group (background dataset)");
  sgen->add_option("--out", scene_gen_args.out, "output dataset directory")->required();
  sgen->add_flag("--json", scene_gen_args.as_json, "JSON result on stdout");
  sgen->callback([&] { mode = 1; });

  CLI::App* sdemo = scene->add_subcommand("demo", "generate an expert demonstration");
  sdemo->add_option("--preset", scene_demo_args.demo_preset, "demo preset: pick-lift, approach");
  sdemo->add_option("--scene-preset", scene_demo_args.scene_preset, "scene preset");
  sdemo->add_option("--scene-json", scene_demo_args.scene_json, "scene description file");
  sdemo->add_option("--demo-json", scene_demo_args.demo_json, "demo spec file");
  sdemo->add_option("--steps", scene_demo_args.steps, "override timestep count");
  sdemo->add_option("--t-grasp", scene_demo_args.t_grasp, "override grasp timestep");
  sdemo->add_option("--size", scene_demo_args.size, "image width and height");
  sdemo->add_option("--fov", scene_demo_args.fov, "field of view in degrees");
  sdemo->add_option("--out", scene_demo_args.out, "output trajectory directory")->required();
  sdemo->add_flag("--json", scene_demo_args.as_json, "JSON result on stdout");
  sdemo->callback([&] { mode = 2; });

  CLI::App* field = app.add_subcommand("field", "voxel radiance fields");
  field->require_subcommand(1);
  CLI::App* ftrain = field->add_subcommand("train", "fit a field to a posed dataset");
  train_binder.bind(ftrain->add_option("--data", train_args.data, "dataset directory")->required(),
                    [&](const json& v) { train_args.data = v.get<std::string>(); });
  train_binder.bind(ftrain->add_option("--res", train_args.res, "grid resolution per axis"),
                    [&](const json& v) { train_args.res = v.get<int>(); });
  train_binder.bind(ftrain->add_option("--iters", train_args.iters, "gradient iterations"),
                    [&](const json& v) { train_args.iters = v.get<int>(); });
  train_binder.bind(ftrain->add_option("--rays", train_args.rays, "rays per batch"),
                    [&](const json& v) { train_args.rays = v.get<int>(); });
  train_binder.bind(ftrain->add_option("--samples", train_args.samples, "samples per ray"),
                    [&](const json& v) { train_args.samples = v.get<int>(); });
  train_binder.bind(ftrain->add_option("--lr", train_args.lr, "Adam learning rate"),
                    [&](const json& v) { train_args.lr = v.get<double>(); });
  train_binder.bind(ftrain->add_option("--tv", train_args.tv, "total-variation weight"),
                    [&](const json& v) { train_args.tv = v.get<double>(); });
  train_binder.bind(ftrain->add_option("--holdout", train_args.holdout, "holdout fraction"),
                    [&](const json& v) { train_args.holdout = v.get<double>(); });
  train_binder.bind(ftrain->add_option("--t-near", train_args.t_near, "near plane, meters"),
                    [&](const json& v) { train_args.t_near = v.get<double>(); });
  train_binder.bind(ftrain->add_option("--t-far", train_args.t_far, "far plane, meters"),
                    [&](const json& v) { train_args.t_far = v.get<double>(); });
  train_binder.bind(ftrain->add_option("--seed", train_args.seed, "training seed"),
                    [&](const json& v) { train_args.seed = v.get<uint64_t>(); });
  train_binder.bind(
      ftrain->add_option("--bbox", train_args.bbox, "field bbox: 6 csv numbers (min, max)"),
      [&](const json& v) { train_args.bbox = v.get<std::string>(); });
  train_binder.bind(ftrain->add_option("--threads", train_args.threads, "OpenMP threads"),
                    [&](const json& v) { train_args.threads = v.get<int>(); });
  ftrain->add_option("--out", train_args.out, "output field file")->required();
  ftrain->add_option("--report", train_args.report, "training report JSONL path");
  ftrain->add_option("--config", train_config, "JSON config (flags take precedence)");
  ftrain->add_flag("--json", train_args.as_json, "JSON result on stdout");
  ftrain->callback([&] { mode = 3; });

  CLI::App* frender = field->add_subcommand("render", "render a field to PNG");
  frender->add_option("--field", render_args.field, "field file")->required();
  frender->add_option("--pose", render_args.pose, "camera-to-world, 16 csv numbers");
  frender->add_option("--look-from", render_args.look_from, "camera position, 3 csv numbers");
  frender->add_option("--look-to", render_args.look_to, "look-at target, 3 csv numbers");
  frender->add_option("--size", render_args.size, "image width and height");
  frender->add_option("--fov", render_args.fov, "field of view in degrees");
  frender->add_option("--samples", render_args.samples, "samples per ray");
  frender->add_option("--t-near", render_args.t_near, "near plane, meters");
  frender->add_option("--t-far", render_args.t_far, "far plane, meters");
  frender->add_option("--bg", render_args.bg, "background rgb, 3 csv numbers");
  frender->add_flag("--stratified", render_args.stratified, "jitter sample positions");
  frender->add_option("--seed", render_args.seed, "stratified jitter seed");
  frender->add_option("--tau", render_args.tau, "mask threshold");
  frender->add_option("--out", render_args.out, "output PNG")->required();
  frender->add_option("--opacity-out", render_args.opacity_out, "opacity PNG");
  frender->add_option("--mask-out", render_args.mask_out, "thresholded mask PNG");
  frender->add_option("--threads", render_args.threads, "OpenMP threads");
  frender->add_flag("--json", render_args.as_json, "JSON result on stdout");
  frender->callback([&] { mode = 4; });

  CLI::App* augment = app.add_subcommand("augment", "demonstration augmentation");
  augment->require_subcommand(1);
  CLI::App* arun = augment->add_subcommand("run", "replace the demo object with a novel one");
  augment_binder.bind(
      arun->add_option("--demo", augment_args.demo, "demo trajectory directory")->required(),
      [&](const json& v) { augment_args.demo = v.get<std::string>(); });
  augment_binder.bind(arun->add_option("--object-field", augment_args.object_field,
                                       "novel-object field file")
                          ->required(),
                      [&](const json& v) { augment_args.object_field = v.get<std::string>(); });
  augment_binder.bind(arun->add_option("--background-field", augment_args.background_field,
                                       "background field file")
                          ->required(),
                      [&](const json& v) { augment_args.background_field = v.get<std::string>(); });
  augment_binder.bind(arun->add_option("--tau", augment_args.tau, "novel-object mask threshold"),
                      [&](const json& v) { augment_args.tau = v.get<double>(); });
  augment_binder.bind(arun->add_option("--noise-mode", augment_args.noise_mode,
                                       "off, per-trajectory or per-timestep"),
                      [&](const json& v) { augment_args.noise_mode = v.get<std::string>(); });
  augment_binder.bind(arun->add_option("--sigma-rot", augment_args.sigma_rot, "noise, radians"),
                      [&](const json& v) { augment_args.sigma_rot = v.get<double>(); });
  augment_binder.bind(arun->add_option("--sigma-trans", augment_args.sigma_trans, "noise, meters"),
                      [&](const json& v) { augment_args.sigma_trans = v.get<double>(); });
  augment_binder.bind(arun->add_option("--noise-seed", augment_args.noise_seed, "noise seed"),
                      [&](const json& v) { augment_args.noise_seed = v.get<uint64_t>(); });
  augment_binder.bind(arun->add_option("--samples", augment_args.samples, "samples per ray"),
                      [&](const json& v) { augment_args.samples = v.get<int>(); });
  augment_binder.bind(arun->add_option("--t-near", augment_args.t_near, "near plane, meters"),
                      [&](const json& v) { augment_args.t_near = v.get<double>(); });
  augment_binder.bind(arun->add_option("--t-far", augment_args.t_far, "far plane, meters"),
                      [&](const json& v) { augment_args.t_far = v.get<double>(); });
  augment_binder.bind(arun->add_option("--background-rgb", augment_args.background_rgb,
                                       "ambient color behind the background field, 3 csv"),
                      [&](const json& v) { augment_args.background_rgb = v.get<std::string>(); });
  augment_binder.bind(
      arun->add_option("--mask-source", augment_args.mask_source, "auto, gt or segment"),
      [&](const json& v) { augment_args.mask_source = v.get<std::string>(); });
  augment_binder.bind(
      arun->add_option("--threshold", augment_args.threshold, "segmentation threshold"),
      [&](const json& v) { augment_args.threshold = v.get<double>(); });
  augment_binder.bind(arun->add_option("--min-blob", augment_args.min_blob,
                                       "minimum segmentation component, pixels"),
                      [&](const json& v) { augment_args.min_blob = v.get<int>(); });
  augment_binder.bind(
      arun->add_option("--dilate", augment_args.dilate, "original-mask dilation radius"),
      [&](const json& v) { augment_args.dilate = v.get<int>(); });
  augment_binder.bind(
      arun->add_option("--out-size", augment_args.out_size, "output frame resolution"),
      [&](const json& v) { augment_args.out_size = v.get<int>(); });
  augment_binder.bind(arun->add_option("--threads", augment_args.threads, "OpenMP threads"),
                      [&](const json& v) { augment_args.threads = v.get<int>(); });
  arun->add_flag("--soft-mask", augment_args.soft_mask, "blend with raw opacity");
  arun->add_option("--out", augment_args.out, "output trajectory directory")->required();
  arun->add_option("--config", augment_config, "JSON config (flags take precedence)");
  arun->add_flag("--json", augment_args.as_json, "JSON result on stdout");
  arun->callback([&] { mode = 5; });

  CLI::App* eval = app.add_subcommand("eval", "quality evaluation");
  eval->require_subcommand(1);
  CLI::App* epsnr = eval->add_subcommand("psnr", "PSNR of a field against a dataset, or of two trajectories");
  epsnr->add_option("--field", psnr_args.field, "field file");
  epsnr->add_option("--data", psnr_args.data, "dataset directory");
  epsnr->add_flag("--holdout", psnr_args.holdout_only, "restrict to the holdout split");
  epsnr->add_option("--holdout-fraction", psnr_args.holdout_fraction, "fraction used at training");
  epsnr->add_option("--seed", psnr_args.seed, "training seed (fixes the split)");
  epsnr->add_option("--samples", psnr_args.samples, "samples per ray");
  epsnr->add_option("--t-near", psnr_args.t_near, "near plane, meters");
  epsnr->add_option("--t-far", psnr_args.t_far, "far plane, meters");
  epsnr->add_option("--produced", psnr_args.produced, "produced trajectory directory");
  epsnr->add_option("--oracle", psnr_args.oracle, "oracle trajectory directory");
  epsnr->add_option("--threads", psnr_args.threads, "OpenMP threads");
  epsnr->add_flag("--json", psnr_args.as_json, "JSON result on stdout");
  epsnr->callback([&] { mode = 6; });

  CLI::App* eiou = eval->add_subcommand("iou", "mask intersection-over-union");
  eiou->add_option("--produced", iou_args.produced, "produced trajectory directory");
  eiou->add_option("--oracle", iou_args.oracle, "oracle trajectory directory");
  eiou->add_option("--a", iou_args.a_png, "first mask PNG");
  eiou->add_option("--b", iou_args.b_png, "second mask PNG");
  eiou->add_flag("--json", iou_args.as_json, "JSON result on stdout");
  eiou->callback([&] { mode = 7; });

  CLI::App* epose = eval->add_subcommand("pose", "pose agreement of two trajectories");
  epose->add_option("--a", pose_args.a, "first trajectory directory")->required();
  epose->add_option("--b", pose_args.b, "second trajectory directory")->required();
  epose->add_flag("--json", pose_args.as_json, "JSON result on stdout");
  epose->callback([&] { mode = 8; });

  CLI::App* bench = app.add_subcommand("bench", "throughput benchmarks");
  bench->require_subcommand(1);
  CLI::App* brender = bench->add_subcommand("render", "render throughput and thread scaling");
  bench_binder.bind(brender->add_option("--field", bench_args.field, "field file")->required(),
                    [&](const json& v) { bench_args.field = v.get<std::string>(); });
  bench_binder.bind(brender->add_option("--frames", bench_args.frames, "frames to render"),
                    [&](const json& v) { bench_args.frames = v.get<int>(); });
  bench_binder.bind(brender->add_option("--size", bench_args.size, "image width and height"),
                    [&](const json& v) { bench_args.size = v.get<int>(); });
  bench_binder.bind(brender->add_option("--samples", bench_args.samples, "samples per ray"),
                    [&](const json& v) { bench_args.samples = v.get<int>(); });
  bench_binder.bind(brender->add_option("--threads", bench_args.threads, "OpenMP threads"),
                    [&](const json& v) { bench_args.threads = v.get<int>(); });
  bench_binder.bind(
      brender->add_option("--thread-list", bench_args.thread_list, "thread counts to sweep, csv"),
      [&](const json& v) { bench_args.thread_list = v.get<std::string>(); });
  brender->add_flag("--compare-serial", bench_args.compare_serial,
                    "also time the serial reference renderer");
  brender->add_option("--config", bench_config, "JSON config (flags take precedence)");
  brender->add_flag("--json", bench_args.as_json, "JSON result on stdout");
  brender->callback([&] { mode = 9; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    switch (mode) {
      case 1:
        return run_scene_gen(scene_gen_args);
      case 2:
        return run_scene_demo(scene_demo_args);
      case 3:
        train_binder.apply(train_config);
        return run_field_train(train_args);
      case 4:
        return run_field_render(render_args);
      case 5:
        augment_binder.apply(augment_config);
        return run_augment(augment_args);
      case 6:
        return run_eval_psnr(psnr_args);
      case 7:
        return run_eval_iou(iou_args);
      case 8:
        return run_eval_pose(pose_args);
      case 9:
        bench_binder.apply(bench_config);
        return run_bench(bench_args);
      default:
        return 1;
    }
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) { return dispatch(argc, argv); }
