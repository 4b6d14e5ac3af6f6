// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "voxaug/field.hpp"
#include "voxaug/geometry.hpp"
#include "voxaug/image.hpp"
#include "voxaug/render.hpp"

namespace voxaug {

/// The set {(I_k, T_k)}: images with camera-to-world poses sharing one
/// pinhole intrinsics block.
struct PosedImageDataset {
  struct Frame {
    Image image;  // H x W x 3, values in [0, 1]
    Se3Pose camera_to_world;
  };
  PinholeCamera cam;
  std::vector<Frame> frames;

  void validate() const;
};

struct TrainConfig {
  int iterations = 4000;
  int rays_per_batch = 4096;
  double learning_rate = 0.05;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double tv_weight = 1e-4;
  uint64_t seed = 0;
  double holdout_fraction = 0.0;  // in [0, 1)
  int checkpoint_every = 500;
  RenderConfig render;  // quadrature used for training rays and holdout eval

  void validate() const;
};

/// Dense gradient buffers matching a field's grids. Only voxels touched by
/// the batch end up nonzero.
struct GradGrids {
  std::vector<double> density;  // node_count()
  std::vector<double> rgb;      // node_count() * 3, channel-innermost
};

/// Reusable scratch for the gradient kernel; passing one across calls avoids
/// re-allocating the entry buffers every iteration.
struct PhotometricWorkspace {
  struct Entry {
    uint32_t idx;
    float gd, gr, gg, gb;
  };
  std::vector<Entry> entries;
  std::vector<Entry> sorted;
  std::vector<int> counts;
  std::vector<int> slab_counts;
  std::vector<size_t> cursors;
  std::vector<double> ray_loss;
};

/// Mean over rays of the channel-summed squared error between the marched
/// color and the target, with analytic gradients back to the raw grids.
/// Zeroes and fills `grads`. Deterministic at any thread count: per-voxel
/// contributions are reduced in (ray, emission) order via a fixed slab
/// partition of the index space.
double photometric_loss_and_grad(const VoxelField& field, std::span<const Ray> rays,
                                 std::span<const Vec3> targets, const RenderConfig& cfg,
                                 GradGrids& grads, PhotometricWorkspace* ws = nullptr);

/// Single-thread reference with a direct sequential scatter; tests assert it
/// matches the parallel kernel bitwise.
double photometric_loss_and_grad_serial(const VoxelField& field, std::span<const Ray> rays,
                                        std::span<const Vec3> targets, const RenderConfig& cfg,
                                        GradGrids& grads, PhotometricWorkspace* ws = nullptr);

/// weight * sum over axis-adjacent raw-density pairs of the squared
/// difference; the exact derivative is accumulated into grad_density.
double tv_penalty_and_grad(const VoxelField& field, double weight,
                           std::span<double> grad_density);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  int64_t step = 0;

  explicit AdamState(size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// Standard bias-corrected Adam update, elementwise over the grid.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, double beta1, double beta2, double eps);

struct TrainCheckpoint {
  int iteration = 0;
  double loss = 0.0;             // photometric + TV for that batch
  double holdout_psnr_db = 0.0;  // NaN when no holdout frames exist
  double wall_seconds = 0.0;
};

struct TrainReport {
  std::vector<TrainCheckpoint> checkpoints;
  std::vector<int> train_indices;
  std::vector<int> holdout_indices;
};

struct TrainResult {
  VoxelField field;
  TrainReport report;
};

/// The deterministic holdout split train_field uses: seeded shuffle, first
/// floor(fraction * n) frames held out (at least one when fraction > 0),
/// both halves returned sorted. Exposed so evaluations can reproduce it.
void holdout_split(int n_frames, double fraction, uint64_t seed, std::vector<int>* train_indices,
                   std::vector<int>* holdout_indices);

/// Fits a voxel field to the dataset by Adam on the photometric + TV
/// objective. Raw grids start at density -2 (mostly transparent) and rgb 0
/// (mid gray). Holdout frames never contribute gradients. Fixed seed gives
/// a bitwise-identical field at any thread count.
TrainResult train_field(const PosedImageDataset& dataset, const Vec3& bbox_min,
                        const Vec3& bbox_max, int nx, int ny, int nz, const TrainConfig& cfg);

/// One JSON object per checkpoint: {iteration, loss, holdout_psnr_db,
/// wall_seconds}.
void write_train_report_jsonl(const TrainReport& report, const std::string& path);

}  // namespace voxaug
