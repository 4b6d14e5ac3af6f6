// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "voxaug/geometry.hpp"
#include "voxaug/rng.hpp"

namespace testutil {

using Mat4 = std::array<double, 16>;

// Independent 4x4 homogeneous-matrix routes used as oracles for the pose
// algebra. Deliberately not built on Se3Pose.

inline Mat4 mat4_mul(const Mat4& a, const Mat4& b) {
  Mat4 out{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += a[r * 4 + k] * b[k * 4 + c];
      out[r * 4 + c] = acc;
    }
  return out;
}

// Gauss-Jordan inverse with partial pivoting.
inline Mat4 mat4_inverse(const Mat4& m) {
  double a[4][8];
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) a[r][c] = m[r * 4 + c];
    for (int c = 0; c < 4; ++c) a[r][4 + c] = (r == c) ? 1.0 : 0.0;
  }
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    for (int c = 0; c < 8; ++c) std::swap(a[col][c], a[pivot][c]);
    const double inv = 1.0 / a[col][col];
    for (int c = 0; c < 8; ++c) a[col][c] *= inv;
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (int c = 0; c < 8; ++c) a[r][c] -= f * a[col][c];
    }
  }
  Mat4 out{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out[r * 4 + c] = a[r][4 + c];
  return out;
}

inline double mat4_max_abs_diff(const Mat4& a, const Mat4& b) {
  double worst = 0.0;
  for (int i = 0; i < 16; ++i) worst = std::fmax(worst, std::fabs(a[i] - b[i]));
  return worst;
}

inline voxaug::Vec3 random_unit_vec(voxaug::RngStream& rng) {
  const double z = 2.0 * rng.u01() - 1.0;
  const double phi = 2.0 * M_PI * rng.u01();
  const double s = std::sqrt(std::fmax(0.0, 1.0 - z * z));
  return {s * std::cos(phi), s * std::sin(phi), z};
}

inline voxaug::Se3Pose random_pose(voxaug::RngStream& rng) {
  const voxaug::Vec3 axis = random_unit_vec(rng);
  const double angle = rng.u01() * M_PI;
  const voxaug::Vec3 t{4.0 * rng.u01() - 2.0, 4.0 * rng.u01() - 2.0, 4.0 * rng.u01() - 2.0};
  return voxaug::Se3Pose::from_axis_angle(axis, angle, t);
}

}  // namespace testutil
