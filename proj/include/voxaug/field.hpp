// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "voxaug/math.hpp"

namespace voxaug {

/// Dense voxel radiance grid over an axis-aligned box. Grid nodes are placed
/// at the box corners and spaced evenly (node i of N sits at
/// bbox_min + i / (N-1) * extent), so trilinear interpolation covers the
/// whole box without extrapolation. Values are pre-activation ("raw"):
/// density passes through softplus, color through a logistic sigmoid.
/// Color is view-independent.
struct VoxelField {
  int nx = 0, ny = 0, nz = 0;
  Vec3 bbox_min;
  Vec3 bbox_max;
  std::vector<float> raw_density;  // index (z*ny + y)*nx + x
  std::vector<float> raw_rgb;      // same order, channel-innermost

  /// Throws ValidationError unless every resolution component is >= 2 and
  /// bbox_min < bbox_max componentwise.
  static VoxelField create(int nx, int ny, int nz, const Vec3& bbox_min, const Vec3& bbox_max,
                           float init_raw_density = -2.0f, float init_raw_rgb = 0.0f);

  size_t node_index(int x, int y, int z) const {
    return (static_cast<size_t>(z) * ny + y) * nx + x;
  }
  size_t node_count() const { return static_cast<size_t>(nx) * ny * nz; }

  Vec3 voxel_size() const {
    return {(bbox_max.x - bbox_min.x) / (nx - 1), (bbox_max.y - bbox_min.y) / (ny - 1),
            (bbox_max.z - bbox_min.z) / (nz - 1)};
  }

  /// Shape/bbox invariants plus a finiteness scan of both grids.
  void validate() const;
};

/// Raw (pre-activation) values at a point. Outside the bbox both fields are
/// -infinity, which the activations map to sigma = 0 and rgb = (0,0,0).
struct RawSample {
  double density = 0.0;
  Vec3 rgb;
};

/// Activated values: sigma in 1/m (>= 0), rgb in [0,1]^3.
struct FieldSample {
  double sigma = 0.0;
  Vec3 rgb;
};

/// 8-corner trilinear interpolation of both raw grids; the hot path of every
/// render and gradient kernel, so it lives in the header.
inline RawSample trilinear_sample(const VoxelField& field, const Vec3& p) {
  if (p.x < field.bbox_min.x || p.x > field.bbox_max.x || p.y < field.bbox_min.y ||
      p.y > field.bbox_max.y || p.z < field.bbox_min.z || p.z > field.bbox_max.z) {
    const double ninf = -std::numeric_limits<double>::infinity();
    return {ninf, {ninf, ninf, ninf}};
  }

  const double gx =
      (p.x - field.bbox_min.x) / (field.bbox_max.x - field.bbox_min.x) * (field.nx - 1);
  const double gy =
      (p.y - field.bbox_min.y) / (field.bbox_max.y - field.bbox_min.y) * (field.ny - 1);
  const double gz =
      (p.z - field.bbox_min.z) / (field.bbox_max.z - field.bbox_min.z) * (field.nz - 1);
  const int ix = std::min(field.nx - 2, std::max(0, static_cast<int>(gx)));
  const int iy = std::min(field.ny - 2, std::max(0, static_cast<int>(gy)));
  const int iz = std::min(field.nz - 2, std::max(0, static_cast<int>(gz)));
  const double fx = gx - ix, fy = gy - iy, fz = gz - iz;

  const size_t i000 = field.node_index(ix, iy, iz);
  const size_t sx = 1;
  const size_t sy = static_cast<size_t>(field.nx);
  const size_t sz = static_cast<size_t>(field.nx) * field.ny;

  auto lerp3 = [&](const float* grid, size_t stride_per_node, size_t channel) {
    auto v = [&](size_t di) {
      return static_cast<double>(grid[(i000 + di) * stride_per_node + channel]);
    };
    const double c00 = v(0) + fx * (v(sx) - v(0));
    const double c10 = v(sy) + fx * (v(sy + sx) - v(sy));
    const double c01 = v(sz) + fx * (v(sz + sx) - v(sz));
    const double c11 = v(sz + sy) + fx * (v(sz + sy + sx) - v(sz + sy));
    const double c0 = c00 + fy * (c10 - c00);
    const double c1 = c01 + fy * (c11 - c01);
    return c0 + fz * (c1 - c0);
  };

  RawSample out;
  out.density = lerp3(field.raw_density.data(), 1, 0);
  out.rgb = {lerp3(field.raw_rgb.data(), 3, 0), lerp3(field.raw_rgb.data(), 3, 1),
             lerp3(field.raw_rgb.data(), 3, 2)};
  return out;
}

/// Grid-coordinate decomposition of a point known to lie inside the bbox:
/// base node (ix,iy,iz) and fractions in [0,1]. Shared by trilinear_sample
/// and the gradient scatter in the trainer.
struct GridCoord {
  int ix, iy, iz;
  double fx, fy, fz;
};

inline GridCoord grid_coord(const VoxelField& field, const Vec3& p) {
  const double gx =
      (p.x - field.bbox_min.x) / (field.bbox_max.x - field.bbox_min.x) * (field.nx - 1);
  const double gy =
      (p.y - field.bbox_min.y) / (field.bbox_max.y - field.bbox_min.y) * (field.ny - 1);
  const double gz =
      (p.z - field.bbox_min.z) / (field.bbox_max.z - field.bbox_min.z) * (field.nz - 1);
  GridCoord g;
  g.ix = std::min(field.nx - 2, std::max(0, static_cast<int>(gx)));
  g.iy = std::min(field.ny - 2, std::max(0, static_cast<int>(gy)));
  g.iz = std::min(field.nz - 2, std::max(0, static_cast<int>(gz)));
  g.fx = gx - g.ix;
  g.fy = gy - g.iy;
  g.fz = gz - g.iz;
  return g;
}

/// softplus, numerically stable for large |x|; softplus(-inf) == 0.
inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

/// Logistic sigmoid; maps -inf to 0 without overflow.
inline double logistic(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline FieldSample activate(double raw_density, const Vec3& raw_rgb) {
  return {softplus(raw_density),
          {logistic(raw_rgb.x), logistic(raw_rgb.y), logistic(raw_rgb.z)}};
}

inline FieldSample activate(const RawSample& raw) { return activate(raw.density, raw.rgb); }

/// Binary field format, little-endian: magic "NFAF", version u32 = 1,
/// nx/ny/nz as u32, bbox_min then bbox_max as 6 x f64, raw_density as f32
/// with index (z*ny + y)*nx + x, then raw_rgb as f32 in the same node order,
/// channel-innermost. Round-trips are bit-exact.
void save_field(const VoxelField& field, const std::string& path);

/// Throws IoError (unreadable), FormatError (magic/version/non-finite), or
/// TruncationError (payload shorter than the header promises).
VoxelField load_field(const std::string& path);

}  // namespace voxaug
