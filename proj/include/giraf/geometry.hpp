#pragma once

#include <array>
#include <cmath>

#include "giraf/error.hpp"

namespace giraf {

// All positions are meters in a right-handed frame. The camera frame has
// +x right, +y down (matching image v), +z into the scene.

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x, double y, double z) : x(x), y(y), z(z) {}

  constexpr Vec3 operator+(const Vec3& o) const {
    return {x + o.x, y + o.y, z + o.z};
  }
  constexpr Vec3 operator-(const Vec3& o) const {
    return {x - o.x, y - o.y, z - o.z};
  }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr bool operator==(const Vec3& o) const {
    return x == o.x && y == o.y && z == o.z;
  }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline constexpr double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) {
  double n = norm(v);
  return {v.x / n, v.y / n, v.z / n};
}

inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Strict lexicographic (x, y, z) order, used as the deterministic tie rule
// when two candidates sit at exactly the same distance.
inline constexpr bool lex_less(const Vec3& a, const Vec3& b) {
  if (a.x != b.x) return a.x < b.x;
  if (a.y != b.y) return a.y < b.y;
  return a.z < b.z;
}

struct Pixel {
  double u = 0.0;
  double v = 0.0;
  constexpr bool operator==(const Pixel& o) const {
    return u == o.u && v == o.v;
  }
};

struct CameraIntrinsics {
  double fx = 600.0;
  double fy = 600.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;
};

inline CameraIntrinsics default_camera() { return CameraIntrinsics{}; }

// Half-line from `origin` along the unit vector `direction`.
struct Ray {
  Vec3 origin;
  Vec3 direction;
};

constexpr double kUnitTolerance = 1e-9;

inline bool is_unit(const Vec3& v, double tol = kUnitTolerance) {
  return std::abs(norm(v) - 1.0) <= tol;
}

struct Mat3 {
  // Row-major.
  std::array<double, 9> m = {1, 0, 0, 0, 1, 0, 0, 0, 1};

  double operator()(int r, int c) const { return m[3 * r + c]; }
  double& operator()(int r, int c) { return m[3 * r + c]; }

  static Mat3 identity() { return Mat3{}; }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }

  Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
    return r;
  }
};

// Rodrigues rotation about a (not necessarily unit) axis.
inline Mat3 axis_angle(const Vec3& axis, double angle) {
  Vec3 u = normalized(axis);
  double c = std::cos(angle);
  double s = std::sin(angle);
  double t = 1.0 - c;
  Mat3 r;
  r(0, 0) = c + u.x * u.x * t;
  r(0, 1) = u.x * u.y * t - u.z * s;
  r(0, 2) = u.x * u.z * t + u.y * s;
  r(1, 0) = u.y * u.x * t + u.z * s;
  r(1, 1) = c + u.y * u.y * t;
  r(1, 2) = u.y * u.z * t - u.x * s;
  r(2, 0) = u.z * u.x * t - u.y * s;
  r(2, 1) = u.z * u.y * t + u.x * s;
  r(2, 2) = c + u.z * u.z * t;
  return r;
}

struct RigidTransform {
  Mat3 rotation;
  Vec3 translation;

  static RigidTransform identity() { return RigidTransform{}; }
};

inline Vec3 apply_transform(const RigidTransform& t, const Vec3& p) {
  return t.rotation * p + t.translation;
}

inline Ray apply_transform(const RigidTransform& t, const Ray& r) {
  return Ray{apply_transform(t, r.origin), t.rotation * r.direction};
}

// Camera-frame position of the pixel at the given depth.
inline Vec3 deproject(const Pixel& px, double depth,
                      const CameraIntrinsics& cam) {
  if (!(depth > 0.0)) throw NonPositiveDepthError(depth);
  return {(px.u - cam.cx) * depth / cam.fx, (px.v - cam.cy) * depth / cam.fy,
          depth};
}

inline Pixel project(const Vec3& p, const CameraIntrinsics& cam) {
  if (!(p.z > 0.0)) throw BehindCameraError(p.z);
  return {cam.fx * p.x / p.z + cam.cx, cam.fy * p.y / p.z + cam.cy};
}

// Distance from `p` to the half-line `r`. The parameter is clamped at the
// ray origin, so points behind the fingertip measure to the fingertip
// rather than to the infinite line.
inline double ray_point_distance(const Ray& r, const Vec3& p) {
  Vec3 d = p - r.origin;
  double t = dot(d, r.direction);
  if (t < 0.0) t = 0.0;
  Vec3 closest = r.origin + t * r.direction;
  return norm(p - closest);
}

}  // namespace giraf
