#pragma once

#include <array>

#include "rflab/core/types.hpp"

// d-simplices embedded in R^N with d = N-1: segments in the plane, triangles
// in space. These are the carriers of boundary meshes.
namespace rflab {

template <int N> struct Simplex {
  std::array<Vec<N>, N> v;
  Vec<N>& operator[](int i) { return v[i]; }
  const Vec<N>& operator[](int i) const { return v[i]; }
  auto begin() const { return v.begin(); }
  auto end() const { return v.end(); }
};

inline double sq_dist_point_segment(const Vec<2>& p, const Vec<2>& a, const Vec<2>& b,
                                    Vec<2>* closest = nullptr) {
  Vec<2> ab = b - a;
  double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  Vec<2> c = a + t * ab;
  if (closest) *closest = c;
  return (p - c).squaredNorm();
}

inline double sq_dist_point_segment3(const Vec<3>& p, const Vec<3>& a, const Vec<3>& b,
                                     Vec<3>* closest = nullptr) {
  Vec<3> ab = b - a;
  double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  Vec<3> c = a + t * ab;
  if (closest) *closest = c;
  return (p - c).squaredNorm();
}

// Ericson, Real-Time Collision Detection, 5.1.5.
inline double sq_dist_point_triangle(const Vec<3>& p, const Vec<3>& a, const Vec<3>& b,
                                     const Vec<3>& c, Vec<3>* closest = nullptr) {
  Vec<3> ab = b - a, ac = c - a, ap = p - a;
  double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) {
    if (closest) *closest = a;
    return (p - a).squaredNorm();
  }
  Vec<3> bp = p - b;
  double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) {
    if (closest) *closest = b;
    return (p - b).squaredNorm();
  }
  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    double v = d1 / (d1 - d3);
    Vec<3> q = a + v * ab;
    if (closest) *closest = q;
    return (p - q).squaredNorm();
  }
  Vec<3> cp = p - c;
  double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) {
    if (closest) *closest = c;
    return (p - c).squaredNorm();
  }
  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    double w = d2 / (d2 - d6);
    Vec<3> q = a + w * ac;
    if (closest) *closest = q;
    return (p - q).squaredNorm();
  }
  double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    Vec<3> q = b + w * (c - b);
    if (closest) *closest = q;
    return (p - q).squaredNorm();
  }
  double denom = 1.0 / (va + vb + vc);
  double v = vb * denom, w = vc * denom;
  Vec<3> q = a + v * ab + w * ac;
  if (closest) *closest = q;
  return (p - q).squaredNorm();
}

template <int N>
double sq_dist_point_simplex(const Vec<N>& p, const Simplex<N>& s, Vec<N>* closest = nullptr) {
  if constexpr (N == 2)
    return sq_dist_point_segment(p, s[0], s[1], closest);
  else
    return sq_dist_point_triangle(p, s[0], s[1], s[2], closest);
}

template <int N> double simplex_measure(const Simplex<N>& s) {
  if constexpr (N == 2) {
    return (s[1] - s[0]).norm();
  } else {
    return 0.5 * (s[1] - s[0]).cross(s[2] - s[0]).norm();
  }
}

// Unit normal as induced by vertex order (not yet oriented outward).
template <int N> Vec<N> simplex_normal(const Simplex<N>& s) {
  if constexpr (N == 2) {
    Vec<2> t = s[1] - s[0];
    Vec<2> n(t[1], -t[0]);
    double len = n.norm();
    return len > 0 ? Vec<2>(n / len) : Vec<2>(0, 1);
  } else {
    Vec<3> n = (s[1] - s[0]).cross(s[2] - s[0]);
    double len = n.norm();
    return len > 0 ? Vec<3>(n / len) : Vec<3>(0, 0, 1);
  }
}

template <int N> Box<N> simplex_box(const Simplex<N>& s) {
  Box<N> b(s[0], s[0]);
  for (int i = 1; i < N; ++i) b.extend(s[i]);
  return b;
}

template <int N> Vec<N> simplex_centroid(const Simplex<N>& s) {
  Vec<N> c = Vec<N>::Zero();
  for (const auto& v : s) c += v;
  return c / double(N);
}

inline bool box_overlaps_simplex(const Box<2>& box, const Simplex<2>& s) {
  if (!box.intersects(simplex_box(s))) return false;
  // Separating axis: the segment normal.
  Vec<2> n = simplex_normal(s);
  double d = n.dot(s[0]);
  double lo = kInf, hi = -kInf;
  for (int cx = 0; cx < 2; ++cx)
    for (int cy = 0; cy < 2; ++cy) {
      Vec<2> corner(cx ? box.max()[0] : box.min()[0], cy ? box.max()[1] : box.min()[1]);
      double v = n.dot(corner);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  return lo <= d && d <= hi;
}

// Akenine-Moller triangle/box separating-axis test.
inline bool box_overlaps_simplex(const Box<3>& box, const Simplex<3>& s) {
  if (!box.intersects(simplex_box(s))) return false;
  Vec<3> c = box.center();
  Vec<3> h = 0.5 * box.sizes();
  Vec<3> v0 = s[0] - c, v1 = s[1] - c, v2 = s[2] - c;
  Vec<3> e0 = v1 - v0, e1 = v2 - v1, e2 = v0 - v2;

  auto axis_test = [&](const Vec<3>& axis) {
    double p0 = axis.dot(v0), p1 = axis.dot(v1), p2 = axis.dot(v2);
    double r = h[0] * std::abs(axis[0]) + h[1] * std::abs(axis[1]) + h[2] * std::abs(axis[2]);
    double mn = std::min({p0, p1, p2}), mx = std::max({p0, p1, p2});
    return !(mn > r || mx < -r);
  };

  const Vec<3> axes[3] = {Vec<3>::UnitX(), Vec<3>::UnitY(), Vec<3>::UnitZ()};
  for (const auto& u : axes)
    for (const auto& e : {e0, e1, e2}) {
      Vec<3> a = u.cross(e);
      if (a.squaredNorm() > 1e-30 && !axis_test(a)) return false;
    }
  Vec<3> n = e0.cross(e1);
  if (!axis_test(n)) return false;
  return true;
}

// Structured sample of a simplex with covering radius <= spacing, including
// the vertices.
template <int N, class Out>
void sample_simplex(const Simplex<N>& s, double spacing, Out&& out) {
  if constexpr (N == 2) {
    double len = (s[1] - s[0]).norm();
    int m = std::max(1, int(std::ceil(len / std::max(spacing, 1e-300))));
    for (int i = 0; i <= m; ++i) out(Vec<2>(s[0] + (double(i) / m) * (s[1] - s[0])));
  } else {
    double emax = std::max({(s[1] - s[0]).norm(), (s[2] - s[1]).norm(), (s[0] - s[2]).norm()});
    int m = std::max(1, int(std::ceil(emax / std::max(spacing, 1e-300))));
    for (int i = 0; i <= m; ++i)
      for (int j = 0; j <= m - i; ++j) {
        double u = double(i) / m, v = double(j) / m;
        out(Vec<3>(s[0] + u * (s[1] - s[0]) + v * (s[2] - s[0])));
      }
  }
}

}  // namespace rflab
