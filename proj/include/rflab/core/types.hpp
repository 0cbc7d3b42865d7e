#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

// Core Euclidean primitives. The ambient dimension N (= d+1 in the usual
// hypersurface convention) is a compile-time parameter; only N = 2 and N = 3
// are exercised by the lab.
namespace rflab {

template <int N> using Vec = Eigen::Matrix<double, N, 1>;
template <int N> using IVec = Eigen::Matrix<std::int64_t, N, 1>;
template <int N> using Mat = Eigen::Matrix<double, N, N>;
template <int N> using Box = Eigen::AlignedBox<double, N>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <int N> struct Ball {
  Vec<N> center = Vec<N>::Zero();
  double radius = 0.0;

  bool contains(const Vec<N>& p) const { return (p - center).norm() <= radius; }
  bool strictly_contains(const Vec<N>& p) const { return (p - center).norm() < radius; }
  Ball scaled(double lambda) const { return {center, lambda * radius}; }
  Box<N> box() const {
    return Box<N>(center.array() - radius, center.array() + radius);
  }
};

// Oriented hyperplane through `anchor`; signed distance is positive on the
// side the normal points into.
template <int N> struct Hyperplane {
  Vec<N> anchor = Vec<N>::Zero();
  Vec<N> normal = Vec<N>::Unit(N - 1);

  double signed_dist(const Vec<N>& p) const { return normal.dot(p - anchor); }
  double dist(const Vec<N>& p) const { return std::abs(signed_dist(p)); }
  Vec<N> project(const Vec<N>& p) const { return p - signed_dist(p) * normal; }
  bool unit_ok(double tol = 1e-12) const { return std::abs(normal.norm() - 1.0) <= tol; }
};

// Half-open dyadic cube Prod_i [k_i 2^-n, (k_i+1) 2^-n). Levels may be
// negative (side > 1). All corner arithmetic is exact integer arithmetic;
// coordinates are exact in double as long as |k| < 2^52.
template <int N> struct DyadicCube {
  int level = 0;
  IVec<N> corner = IVec<N>::Zero();

  double side() const { return std::ldexp(1.0, -level); }
  double diam() const { return side() * std::sqrt(double(N)); }

  Vec<N> lo() const {
    Vec<N> v;
    for (int i = 0; i < N; ++i) v[i] = std::ldexp(double(corner[i]), -level);
    return v;
  }
  Vec<N> hi() const {
    Vec<N> v;
    for (int i = 0; i < N; ++i) v[i] = std::ldexp(double(corner[i] + 1), -level);
    return v;
  }
  Vec<N> center() const {
    Vec<N> v;
    for (int i = 0; i < N; ++i) v[i] = std::ldexp(double(2 * corner[i] + 1), -level - 1);
    return v;
  }
  Box<N> box() const { return Box<N>(lo(), hi()); }

  // Concentric dilate lambda*Q as a closed box.
  Box<N> dilated_box(double lambda) const {
    Vec<N> c = center();
    double h = 0.5 * lambda * side();
    return Box<N>(c.array() - h, c.array() + h);
  }

  bool contains(const Vec<N>& p) const {
    Vec<N> a = lo(), b = hi();
    for (int i = 0; i < N; ++i)
      if (!(p[i] >= a[i] && p[i] < b[i])) return false;
    return true;
  }

  DyadicCube parent() const {
    DyadicCube q;
    q.level = level - 1;
    for (int i = 0; i < N; ++i) q.corner[i] = corner[i] >> 1;
    return q;
  }

  DyadicCube child(int which) const {
    DyadicCube q;
    q.level = level + 1;
    for (int i = 0; i < N; ++i) q.corner[i] = 2 * corner[i] + ((which >> i) & 1);
    return q;
  }
  static constexpr int n_children() { return 1 << N; }

  bool operator==(const DyadicCube& o) const {
    return level == o.level && corner == o.corner;
  }
  // Deterministic total order used when serializing decompositions.
  bool operator<(const DyadicCube& o) const {
    if (level != o.level) return level < o.level;
    for (int i = 0; i < N; ++i)
      if (corner[i] != o.corner[i]) return corner[i] < o.corner[i];
    return false;
  }
};

// Smallest power of two >= x (x >= 1).
inline double ceil_pow2(double x) {
  double p = 1.0;
  while (p < x) p *= 2.0;
  return p;
}

template <int N> Mat<N> rotation_from_angles(const std::array<double, 3>& a) {
  if constexpr (N == 2) {
    return Eigen::Rotation2D<double>(a[0]).toRotationMatrix();
  } else {
    return (Eigen::AngleAxisd(a[0], Vec<3>::UnitX()) *
            Eigen::AngleAxisd(a[1], Vec<3>::UnitY()) *
            Eigen::AngleAxisd(a[2], Vec<3>::UnitZ()))
        .toRotationMatrix();
  }
}

// In-plane 90 degree rotation (counter-clockwise).
inline Vec<2> rot90(const Vec<2>& v) { return Vec<2>(-v[1], v[0]); }

// Volume of the unit ball in R^d for small d.
inline double unit_ball_volume(int d) {
  switch (d) {
    case 0: return 1.0;
    case 1: return 2.0;
    case 2: return M_PI;
    case 3: return 4.0 * M_PI / 3.0;
    default: throw GeometryError("unit_ball_volume: unsupported dimension");
  }
}

}  // namespace rflab
