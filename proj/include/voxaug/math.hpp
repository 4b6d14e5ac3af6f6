// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace voxaug {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Vec3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) { return v / norm(v); }

inline Vec3 cwise_min(const Vec3& a, const Vec3& b) {
  return {std::fmin(a.x, b.x), std::fmin(a.y, b.y), std::fmin(a.z, b.z)};
}

inline Vec3 cwise_max(const Vec3& a, const Vec3& b) {
  return {std::fmax(a.x, b.x), std::fmax(a.y, b.y), std::fmax(a.z, b.z)};
}

/// 3x3 matrix, row-major.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return Mat3{}; }

  double operator()(int r, int c) const { return m[static_cast<size_t>(r) * 3 + c]; }
  double& operator()(int r, int c) { return m[static_cast<size_t>(r) * 3 + c]; }

  Mat3 operator*(const Mat3& o) const {
    Mat3 out;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        out(r, c) = (*this)(r, 0) * o(0, c) + (*this)(r, 1) * o(1, c) + (*this)(r, 2) * o(2, c);
    return out;
  }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }

  Mat3 transposed() const {
    Mat3 out;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out(r, c) = (*this)(c, r);
    return out;
  }

  double determinant() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }

  bool operator==(const Mat3& o) const { return m == o.m; }
};

/// Rodrigues rotation about a unit axis.
inline Mat3 rotation_from_axis_angle(const Vec3& axis, double angle) {
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  const double x = axis.x, y = axis.y, z = axis.z;
  Mat3 r;
  r.m = {t * x * x + c,     t * x * y - s * z, t * x * z + s * y,
         t * x * y + s * z, t * y * y + c,     t * y * z - s * x,
         t * x * z - s * y, t * y * z + s * x, t * z * z + c};
  return r;
}

/// Rotation-vector (axis * angle) logarithm of a rotation matrix.
/// Stable near the identity; the angle = pi branch recovers the axis from
/// the dominant column of R + I.
inline Vec3 rotation_log(const Mat3& r) {
  const double tr = r(0, 0) + r(1, 1) + r(2, 2);
  const double cos_theta = std::fmin(1.0, std::fmax(-1.0, (tr - 1.0) * 0.5));
  const double theta = std::acos(cos_theta);
  const Vec3 skew{r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)};
  if (theta < 1e-9) return skew * 0.5;
  if (theta > M_PI - 1e-6) {
    int k = 0;
    double best = r(0, 0) + 1.0;
    for (int i = 1; i < 3; ++i)
      if (r(i, i) + 1.0 > best) best = r(i, i) + 1.0, k = i;
    Vec3 axis{r(0, k) + (k == 0), r(1, k) + (k == 1), r(2, k) + (k == 2)};
    axis = normalized(axis);
    if (dot(axis, skew) < 0.0) axis = -axis;
    return axis * theta;
  }
  return skew * (theta / (2.0 * std::sin(theta)));
}

/// Shortest-arc interpolation: R(s) = a * exp(s * log(a^T b)).
inline Mat3 rotation_slerp(const Mat3& a, const Mat3& b, double s) {
  const Vec3 w = rotation_log(a.transposed() * b);
  const double angle = norm(w);
  if (angle == 0.0) return a;
  return a * rotation_from_axis_angle(w / angle, s * angle);
}

}  // namespace voxaug
