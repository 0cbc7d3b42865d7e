#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "rflab/core/domain.hpp"
#include "rflab/core/hausdorff.hpp"
#include "rflab/core/mesh.hpp"
#include "rflab/snowflake/profile.hpp"

// Iterated blip construction: a master bump graph over Q(1) with a fixed
// face subdivision is placed onto every generation cube by a conformal
// affine map.
namespace rflab {

struct BudgetError : GeometryError {
  using GeometryError::GeometryError;
};
struct PlacementError : GeometryError {
  using GeometryError::GeometryError;
};

// A d-cube sitting inside a hyperplane, with outward normal and a
// distinguished side (given by the in-plane unit vector toward it).
template <int N> struct BlipCube {
  Vec<N> center = Vec<N>::Zero();
  double side = 1.0;
  Vec<N> outward = -Vec<N>::Unit(N - 1);
  Vec<N> side_dir = Vec<N>::Unit(0);
  Vec<N> axis_v = Vec<N>::Zero();  // second in-plane axis (N == 3)
};

// (d-1)-dimensional skeleton piece: a point in the plane, a segment in space.
template <int N> struct EdgeSimplex {
  std::array<Vec<N>, N - 1> v;
};

// Conformal affine placement x -> anchor + scale * R x with R a rotation.
template <int N> struct Placement {
  Vec<N> anchor = Vec<N>::Zero();
  double scale = 1.0;
  Mat<N> rot = Mat<N>::Identity();

  Vec<N> apply(const Vec<N>& x) const { return anchor + scale * (rot * x); }
  Vec<N> rotate(const Vec<N>& x) const { return rot * x; }
  Simplex<N> apply(const Simplex<N>& s) const {
    Simplex<N> out;
    for (int i = 0; i < N; ++i) out[i] = apply(s[i]);
    return out;
  }
};

// Pins T(Q(1)) = Q, T(0) = center, T({x_1 = 1/2}) = distinguished side and
// T(-e_N) parallel to the outward normal.
template <int N> Placement<N> placement_for(const BlipCube<N>& q) {
  Placement<N> t;
  t.anchor = q.center;
  t.scale = q.side;
  if constexpr (N == 2) {
    t.rot.col(0) = q.side_dir;
    t.rot.col(1) = -q.outward;
  } else {
    t.rot.col(0) = q.side_dir;
    t.rot.col(1) = (-q.outward).cross(q.side_dir);
    t.rot.col(2) = -q.outward;
  }
  double det = t.rot.determinant();
  double orth = (t.rot * t.rot.transpose() - Mat<N>::Identity()).norm();
  if (std::abs(det - 1.0) > 1e-9 || orth > 1e-9)
    throw PlacementError("placement_for: cube frame is not a rotation");
  return t;
}

// ---------------------------------------------------------------------------
// Double tent P_Q union ~P_Q in master coordinates (Q = Q(1), e = -e_N):
// the lower pyramid hangs toward the outward normal, the open upper one
// pokes inside.
// ---------------------------------------------------------------------------
template <int N> struct DoubleTent {
  double b = 0.05;

  static double linf(const Vec<N>& x) {
    double m = 0.0;
    for (int i = 0; i < N - 1; ++i) m = std::max(m, std::abs(x[i]));
    return m;
  }
  bool in_lower(const Vec<N>& x) const {
    double t = x[N - 1];
    return t >= -b && t <= 0.0 && linf(x) <= 0.5 * (1.0 + t / b);
  }
  bool in_upper_open(const Vec<N>& x) const {
    double t = x[N - 1];
    return t > 0.0 && t < b && linf(x) < 0.5 * (1.0 - t / b);
  }
  bool contains(const Vec<N>& x) const { return in_lower(x) || in_upper_open(x); }

  // Lateral faces of both pyramids (the boundary of the union away from the
  // seam plane), used for separation measurements.
  BoundaryMesh<N> lateral_mesh() const {
    BoundaryMesh<N> mesh;
    for (int sgn = -1; sgn <= 1; sgn += 2) {
      Vec<N> apex = Vec<N>::Zero();
      apex[N - 1] = sgn * b;
      if constexpr (N == 2) {
        mesh.add_face_oriented({Vec<2>(-0.5, 0.0), apex});
        mesh.add_face_oriented({Vec<2>(0.5, 0.0), apex});
      } else {
        Vec<3> corners[4] = {Vec<3>(0.5, 0.5, 0), Vec<3>(-0.5, 0.5, 0),
                             Vec<3>(-0.5, -0.5, 0), Vec<3>(0.5, -0.5, 0)};
        for (int i = 0; i < 4; ++i) {
          mesh.add_face_oriented({corners[i], corners[(i + 1) % 4], apex});
        }
      }
    }
    return mesh;
  }
};

// ---------------------------------------------------------------------------
// Master blip: the graph of psi over Q(1), meshed so that every subdivision
// cube is a union of its own simplices, plus the un-tiled collar and the
// face-edge skeleton.
// ---------------------------------------------------------------------------

template <int N> struct MasterCube {
  Vec<N> center;
  double side;
  Vec<N> outward;
  Vec<N> side_dir;
  Vec<N> axis_v;
  int level;  // subdivision level k (side = face_scale * 8^-k)
};

template <int N> struct MasterBlip {
  std::vector<Simplex<N>> mesh;
  std::vector<int> owner;  // cube index or -1 (collar / flat remainder)
  std::vector<MasterCube<N>> cubes;
  std::vector<EdgeSimplex<N>> skeleton;
  double graph_measure = 0.0;
  double collar_measure = 0.0;
  double max_height = 0.0;
  double separation = kInf;  // dist(bump graph, lateral tent boundary)
  ScaledProfile<N> profile;
  double b = 0.0;
};

namespace detail {

// --- planar helpers for face subdivision -----------------------------------

inline double seg_seg_distance2(const Vec<2>& a0, const Vec<2>& a1, const Vec<2>& b0,
                                const Vec<2>& b1) {
  auto cross2 = [](const Vec<2>& u, const Vec<2>& w) { return u[0] * w[1] - u[1] * w[0]; };
  Vec<2> u = a1 - a0, w = b1 - b0;
  double d1 = cross2(w, a0 - b0), d2 = cross2(w, a1 - b0);
  double d3 = cross2(u, b0 - a0), d4 = cross2(u, b1 - a0);
  if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return 0.0;  // proper crossing
  double best = kInf;
  best = std::min(best, sq_dist_point_segment(a0, b0, b1));
  best = std::min(best, sq_dist_point_segment(a1, b0, b1));
  best = std::min(best, sq_dist_point_segment(b0, a0, a1));
  best = std::min(best, sq_dist_point_segment(b1, a0, a1));
  return best;
}

struct Polygon2 {
  std::vector<Vec<2>> pts;  // convex, CCW

  double area() const {
    double a = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec<2>& p = pts[i];
      const Vec<2>& q = pts[(i + 1) % pts.size()];
      a += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * a;
  }
  double perimeter() const {
    double l = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      l += (pts[(i + 1) % pts.size()] - pts[i]).norm();
    return l;
  }
  bool contains(const Vec<2>& p, double tol = 0.0) const {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      Vec<2> e = pts[(i + 1) % pts.size()] - pts[i];
      Vec<2> d = p - pts[i];
      if (e[0] * d[1] - e[1] * d[0] < -tol) return false;
    }
    return true;
  }
  bool contains_box(const Box<2>& b, double tol = 0.0) const {
    for (int k = 0; k < 4; ++k) {
      Vec<2> c(k & 1 ? b.max()[0] : b.min()[0], k & 2 ? b.max()[1] : b.min()[1]);
      if (!contains(c, tol)) return false;
    }
    return true;
  }
  // distance from a box contained in the polygon to the polygon boundary
  double box_edge_distance(const Box<2>& b) const {
    double best = kInf;
    Vec<2> c00(b.min()[0], b.min()[1]), c10(b.max()[0], b.min()[1]);
    Vec<2> c11(b.max()[0], b.max()[1]), c01(b.min()[0], b.max()[1]);
    Vec<2> corners[5] = {c00, c10, c11, c01, c00};
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec<2>& e0 = pts[i];
      const Vec<2>& e1 = pts[(i + 1) % pts.size()];
      for (int k = 0; k < 4; ++k)
        best = std::min(best, seg_seg_distance2(corners[k], corners[k + 1], e0, e1));
    }
    return std::sqrt(best);
  }
  bool intersects_box(const Box<2>& b) const {
    // SAT for convex polygon vs box
    Box<2> pb;
    pb.setEmpty();
    for (const auto& p : pts) pb.extend(p);
    if (!pb.intersects(b)) return false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      Vec<2> e = pts[(i + 1) % pts.size()] - pts[i];
      Vec<2> n(-e[1], e[0]);
      double pmin = kInf, pmax = -kInf;
      for (const auto& p : pts) {
        double v = n.dot(p);
        pmin = std::min(pmin, v);
        pmax = std::max(pmax, v);
      }
      double bmin = kInf, bmax = -kInf;
      for (int k = 0; k < 4; ++k) {
        Vec<2> c(k & 1 ? b.max()[0] : b.min()[0], k & 2 ? b.max()[1] : b.min()[1]);
        double v = n.dot(c);
        bmin = std::min(bmin, v);
        bmax = std::max(bmax, v);
      }
      if (bmax < pmin || bmin > pmax) return false;
    }
    return true;
  }
  // clip the box against the polygon half-planes (Sutherland-Hodgman)
  std::vector<Vec<2>> clip_box(const Box<2>& b) const {
    std::vector<Vec<2>> poly{Vec<2>(b.min()[0], b.min()[1]), Vec<2>(b.max()[0], b.min()[1]),
                             Vec<2>(b.max()[0], b.max()[1]), Vec<2>(b.min()[0], b.max()[1])};
    for (std::size_t i = 0; i < pts.size() && !poly.empty(); ++i) {
      Vec<2> a = pts[i];
      Vec<2> e = pts[(i + 1) % pts.size()] - a;
      auto side = [&](const Vec<2>& p) { return e[0] * (p[1] - a[1]) - e[1] * (p[0] - a[0]); };
      std::vector<Vec<2>> next;
      for (std::size_t k = 0; k < poly.size(); ++k) {
        Vec<2> p = poly[k], q = poly[(k + 1) % poly.size()];
        double sp = side(p), sq = side(q);
        if (sp >= 0) next.push_back(p);
        if ((sp > 0 && sq < 0) || (sp < 0 && sq > 0)) {
          double t = sp / (sp - sq);
          next.push_back(p + t * (q - p));
        }
      }
      poly = std::move(next);
    }
    return poly;
  }
};

// Planar face of the master graph with an orthonormal in-plane frame such
// that u x v = outward (N = 3).
template <int N> struct MasterFace {
  std::vector<Vec<N>> verts;
  Vec<N> origin, u, v, outward;
  Polygon2 local;  // N == 3
  double len = 0.0;  // N == 2

  Vec<2> to_local(const Vec<N>& p) const {
    return Vec<2>((p - origin).dot(u), N == 3 ? (p - origin).dot(v) : 0.0);
  }
  Vec<N> from_local(const Vec<2>& q) const {
    Vec<N> p = origin + q[0] * u;
    if constexpr (N == 3) p += q[1] * v;
    return p;
  }
};

template <int N> MasterFace<N> make_face(const std::vector<Vec<N>>& verts) {
  MasterFace<N> f;
  f.verts = verts;
  f.origin = verts[0];
  if constexpr (N == 2) {
    Vec<2> t = verts[1] - verts[0];
    f.len = t.norm();
    f.u = t / f.len;
    // outward normal of a graph boundary points downward
    Vec<2> n(f.u[1], -f.u[0]);
    if (n[1] > 0) {
      // re-orient so the tangent runs with positive x when possible
      f.origin = verts[1];
      f.u = -f.u;
      n = -n;
      f.verts = {verts[1], verts[0]};
    }
    f.outward = n;
    f.v = Vec<2>::Zero();
  } else {
    Vec<3> n = (verts[1] - verts[0]).cross(verts[2] - verts[0]).normalized();
    if (n[2] > 0) n = -n;  // domain lies above the graph
    f.outward = n;
    f.u = (verts[1] - verts[0]).normalized();
    f.v = n.cross(f.u);
    // local polygon, forced CCW
    for (const auto& p : verts) f.local.pts.push_back(f.to_local(p));
    if (f.local.area() < 0) {
      std::reverse(f.verts.begin(), f.verts.end());
      f.local.pts.clear();
      f.origin = f.verts[0];
      f.u = (f.verts[1] - f.verts[0]).normalized();
      f.v = n.cross(f.u);
      for (const auto& p : f.verts) f.local.pts.push_back(f.to_local(p));
    }
  }
  return f;
}

// Distinguished side of a subdivision cube: the in-plane axis direction
// closest in angle to the master image of e_1; ties resolved
// lexicographically. In the plane the frame is pinned by the requirement
// that the placement be a rotation.
template <int N>
Vec<N> choose_side_dir(const Vec<N>& outward, const Vec<N>& u, const Vec<N>& v,
                       const Vec<N>& reference) {
  if constexpr (N == 2) {
    (void)u;
    (void)v;
    (void)reference;
    return rot90(outward);
  } else {
    Vec<N> cands[4] = {u, -u, v, -v};
    Vec<N> best = cands[0];
    double best_dot = -kInf;
    for (const auto& c : cands) {
      double d = c.dot(reference);
      bool better = d > best_dot + 1e-15;
      if (!better && d > best_dot - 1e-15) {
        // lexicographic tie-break on the candidate vector
        for (int i = 0; i < N; ++i) {
          if (c[i] > best[i] + 1e-15) {
            better = true;
            break;
          }
          if (c[i] < best[i] - 1e-15) break;
        }
      }
      if (better) {
        best = c;
        best_dot = std::max(best_dot, d);
      }
    }
    return best;
  }
}

}  // namespace detail

struct SubdivisionOptions {
  int k_max = 3;       // finest subdivision level 8^-k_max
  double alpha = 1.0;  // cube side >= dist-to-edges / alpha scaling knob
};

// Subdivide one planar convex face into 8-adic Whitney cubes plus collar
// mesh; appends into the master containers.
template <int N>
void subdivide_face(const detail::MasterFace<N>& face, const SubdivisionOptions& opt,
                    MasterBlip<N>& out) {
  using detail::Polygon2;
  const double tol = 1e-13;
  if constexpr (N == 2) {
    double len = face.len;
    if (len <= tol) return;
    // 8-adic selection on [0, len]
    std::vector<std::set<std::int64_t>> selected(opt.k_max + 1);
    for (int k = 1; k <= opt.k_max; ++k) {
      double h = len / std::pow(8.0, k);
      std::int64_t cells = std::int64_t(std::pow(8.0, k));
      for (std::int64_t i = 0; i < cells; ++i) {
        bool under = false;
        for (int l = 1; l < k && !under; ++l)
          under = selected[l].count(i / std::int64_t(std::pow(8.0, k - l)));
        if (under) continue;
        double lo = i * h, hi = (i + 1) * h;
        double dist = std::min(lo, len - hi);
        if (dist >= opt.alpha * h - tol) {
          selected[k].insert(i);
          MasterCube<N> cube;
          Vec<2> c_local(0.5 * (lo + hi), 0.0);
          cube.center = face.from_local(c_local);
          cube.side = h;
          cube.outward = face.outward;
          cube.side_dir = detail::choose_side_dir<N>(face.outward, face.u, face.v,
                                                     Vec<N>::Unit(0));
          cube.axis_v = Vec<N>::Zero();
          cube.level = k;
          out.mesh.push_back({face.from_local(Vec<2>(lo, 0)), face.from_local(Vec<2>(hi, 0))});
          out.owner.push_back(int(out.cubes.size()));
          out.cubes.push_back(cube);
        }
      }
    }
    // collar: uncovered finest cells merged into runs
    double hf = len / std::pow(8.0, opt.k_max);
    std::int64_t cells = std::int64_t(std::pow(8.0, opt.k_max));
    std::int64_t run_start = -1;
    for (std::int64_t i = 0; i <= cells; ++i) {
      bool covered = i >= cells;
      for (int l = 1; l <= opt.k_max && !covered; ++l)
        covered = selected[l].count(i / std::int64_t(std::pow(8.0, opt.k_max - l)));
      if (!covered && run_start < 0) run_start = i;
      if (covered && run_start >= 0) {
        Vec<N> a = face.from_local(Vec<2>(run_start * hf, 0));
        Vec<N> b = face.from_local(Vec<2>(i * hf, 0));
        out.mesh.push_back({a, b});
        out.owner.push_back(-1);
        out.collar_measure += (b - a).norm();
        run_start = -1;
      }
    }
    // skeleton: the face endpoints
    out.skeleton.push_back({{face.verts.front()}});
    out.skeleton.push_back({{face.verts.back()}});
  } else {
    const Polygon2& poly = face.local;
    if (poly.area() <= tol) return;
    Box<2> bbox;
    bbox.setEmpty();
    for (const auto& p : poly.pts) bbox.extend(p);
    double scale = bbox.sizes().maxCoeff();
    Vec<2> anchor = bbox.min();

    std::vector<std::set<std::pair<std::int64_t, std::int64_t>>> selected(opt.k_max + 1);
    auto emit_tri = [&](const Vec<2>& a, const Vec<2>& b, const Vec<2>& c, int owner) {
      Simplex<N> s{face.from_local(a), face.from_local(b), face.from_local(c)};
      if (simplex_measure(s) <= tol * scale * scale) return;
      out.mesh.push_back(s);
      out.owner.push_back(owner);
      if (owner < 0) out.collar_measure += simplex_measure(s);
    };

    for (int k = 1; k <= opt.k_max; ++k) {
      double h = scale / std::pow(8.0, k);
      std::int64_t cells = std::int64_t(std::llround(std::pow(8.0, k)));
      for (std::int64_t i = 0; i < cells; ++i)
        for (std::int64_t j = 0; j < cells; ++j) {
          bool under = false;
          for (int l = 1; l < k && !under; ++l) {
            std::int64_t f8 = std::int64_t(std::llround(std::pow(8.0, k - l)));
            under = selected[l].count({i / f8, j / f8});
          }
          if (under) continue;
          Box<2> cell(anchor + Vec<2>(i * h, j * h), anchor + Vec<2>((i + 1) * h, (j + 1) * h));
          if (!poly.contains_box(cell, tol)) continue;
          if (poly.box_edge_distance(cell) < opt.alpha * h - tol) continue;
          selected[k].insert({i, j});
          MasterCube<N> cube;
          Vec<2> c_local = cell.center();
          cube.center = face.from_local(c_local);
          cube.side = h;
          cube.outward = face.outward;
          cube.side_dir =
              detail::choose_side_dir<N>(face.outward, face.u, face.v, Vec<N>::Unit(0));
          cube.axis_v = (-face.outward).cross(cube.side_dir);
          cube.level = k;
          int id = int(out.cubes.size());
          out.cubes.push_back(cube);
          Vec<2> c00 = cell.min(), c11 = cell.max();
          Vec<2> c10(c11[0], c00[1]), c01(c00[0], c11[1]);
          emit_tri(c00, c10, c11, id);
          emit_tri(c00, c11, c01, id);
        }
    }

    // collar: recursive 8-adic descent emitting uncovered finest cells
    std::function<void(int, std::int64_t, std::int64_t)> descend =
        [&](int k, std::int64_t i, std::int64_t j) {
          double h = scale / std::pow(8.0, k);
          Box<2> cell(anchor + Vec<2>(i * h, j * h),
                      anchor + Vec<2>((i + 1) * h, (j + 1) * h));
          if (!poly.intersects_box(cell)) return;
          if (k >= 1 && selected[k].count({i, j})) return;
          if (k == opt.k_max) {
            if (poly.contains_box(cell, tol)) {
              Vec<2> c00 = cell.min(), c11 = cell.max();
              Vec<2> c10(c11[0], c00[1]), c01(c00[0], c11[1]);
              emit_tri(c00, c10, c11, -1);
              emit_tri(c00, c11, c01, -1);
            } else {
              auto clipped = poly.clip_box(cell);
              for (std::size_t t = 1; t + 1 < clipped.size(); ++t)
                emit_tri(clipped[0], clipped[t], clipped[t + 1], -1);
            }
            return;
          }
          for (int a = 0; a < 8; ++a)
            for (int bb = 0; bb < 8; ++bb) descend(k + 1, 8 * i + a, 8 * j + bb);
        };
    descend(0, 0, 0);

    // skeleton: the face boundary edges
    for (std::size_t i = 0; i < face.verts.size(); ++i)
      out.skeleton.push_back({{face.verts[i], face.verts[(i + 1) % face.verts.size()]}});
  }
}

namespace detail {

template <int N>
std::vector<MasterFace<N>> profile_faces(const ScaledProfile<N>& psi) {
  std::vector<MasterFace<N>> faces;
  if constexpr (N == 2) {
    for (std::size_t i = 1; i < psi.breaks.size(); ++i) {
      Vec<2> a = psi.breaks[i - 1], b = psi.breaks[i];
      if ((b - a).norm() <= 0) continue;
      faces.push_back(make_face<2>({a, b}));
    }
  } else {
    double rho = psi.support_radius;
    auto lift = [&](double x, double y, double h) { return Vec<3>(x, y, h); };
    const int sx[4] = {1, -1, -1, 1};
    const int sy[4] = {1, 1, -1, -1};
    // radial rings inside the support diamond
    for (std::size_t kpc = 1; kpc < psi.radial.size(); ++kpc) {
      double t0 = psi.radial[kpc - 1][0], h0 = psi.radial[kpc - 1][1];
      double t1 = psi.radial[kpc][0], h1 = psi.radial[kpc][1];
      if (!(t1 > t0)) continue;
      for (int q = 0; q < 4; ++q) {
        std::vector<Vec<3>> verts;
        if (t0 == 0.0) {
          verts = {lift(0, 0, h0), lift(sx[q] * t1, 0, h1), lift(0, sy[q] * t1, h1)};
        } else {
          verts = {lift(sx[q] * t0, 0, h0), lift(sx[q] * t1, 0, h1), lift(0, sy[q] * t1, h1),
                   lift(0, sy[q] * t0, h0)};
        }
        faces.push_back(make_face<3>(verts));
      }
    }
    // central square corners outside the diamond
    for (int q = 0; q < 4; ++q) {
      std::vector<Vec<3>> verts = {lift(sx[q] * rho, 0, 0), lift(sx[q] * rho, sy[q] * rho, 0),
                                   lift(0, sy[q] * rho, 0)};
      faces.push_back(make_face<3>(verts));
    }
    // pinwheel ring between the central square and Q(1)
    if (rho < 0.5) {
      double H = 0.5;
      auto rect = [&](double x0, double y0, double x1, double y1) {
        faces.push_back(make_face<3>(
            {lift(x0, y0, 0), lift(x1, y0, 0), lift(x1, y1, 0), lift(x0, y1, 0)}));
      };
      rect(rho, -rho, H, H);
      rect(-H, rho, rho, H);
      rect(-H, -H, -rho, rho);
      rect(-rho, -H, H, -rho);
    }
  }
  return faces;
}

}  // namespace detail

// Build the master blip once per configuration; each generation reuses it
// under placements.
template <int N>
MasterBlip<N> build_master_blip(const ScaledProfile<N>& psi, double b,
                                const SubdivisionOptions& opt = {}) {
  MasterBlip<N> master;
  master.profile = psi;
  master.b = b;
  auto faces = detail::profile_faces<N>(psi);
  for (const auto& f : faces) subdivide_face(f, opt, master);
  for (const auto& s : master.mesh) master.graph_measure += simplex_measure(s);
  master.max_height = psi.max_height;

  // separation of the bump from the lateral tent boundary
  DoubleTent<N> tent{b};
  auto lateral = tent.lateral_mesh();
  lateral.build_index();
  double sep = kInf;
  bool contained = true;
  for (const auto& f : faces) {
    bool flat = true;
    for (const auto& p : f.verts) flat = flat && p[N - 1] == 0.0;
    if (flat) continue;
    Simplex<N> probe;
    for (int i = 0; i < N; ++i) probe[i] = f.verts[std::min<std::size_t>(i, f.verts.size() - 1)];
    sample_simplex(probe, 0.02, [&](const Vec<N>& p) {
      sep = std::min(sep, lateral.distance(p));
      if (p[N - 1] != 0.0 && !tent.contains(p)) contained = false;
    });
    // quads in space need the second triangle sampled as well
    if constexpr (N == 3) {
      if (f.verts.size() == 4) {
        Simplex<3> probe2{f.verts[0], f.verts[2], f.verts[3]};
        sample_simplex(probe2, 0.02, [&](const Vec<3>& p) {
          sep = std::min(sep, lateral.distance(p));
          if (p[2] != 0.0 && !tent.contains(p)) contained = false;
        });
      }
    }
  }
  master.separation = contained ? sep : 0.0;
  return master;
}

// Smallest frequency whose scaled bump keeps the b/100 separation.
template <int N>
int find_frequency(const ProfileSpec& spec, double b, int freq_max = 64) {
  for (int freq = 1; freq <= freq_max; ++freq) {
    auto psi = make_profile<N>(spec, freq);
    if (psi.max_height == 0.0) return freq;  // flat profile: any placement works
    auto master_probe = build_master_blip<N>(psi, b, SubdivisionOptions{1, 1.0});
    if (master_probe.separation >= b / 100.0) return freq;
  }
  throw GeometryError("find_frequency: no frequency satisfies the separation bound");
}

}  // namespace rflab
