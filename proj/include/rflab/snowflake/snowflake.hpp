#pragma once

#include <memory>
#include <vector>

#include "rflab/core/parallel.hpp"
#include "rflab/snowflake/blip.hpp"

namespace rflab {

template <int N> struct SnowflakeConfig {
  double theta = 0.1;
  double b = 0.05;
  int freq = 0;  // 0: search for the smallest frequency meeting b/100 separation
  int depth = 2;
  bool bounded = true;
  SubdivisionOptions subdiv{3, 1.0};
  ProfileSpec profile{};      // kind and custom data; theta is taken from above
  double box_extent = 4.0;    // working box half-width for the unbounded seed
  std::int64_t max_faces = 4'000'000;
  bool validate = false;      // sampled tent preconditions per blip
  int validate_samples = 5;   // grid resolution per tent axis
};

template <int N> struct SnowflakeGeneration {
  std::vector<Simplex<N>> simplices;
  std::vector<int> owner;  // generation-cube index or -1
  std::vector<BlipCube<N>> cubes;
  std::vector<EdgeSimplex<N>> skeleton;
  double hausdorff_increment = 0.0;  // dist_H to the previous generation
  double collar_measure = 0.0;
  int freq_used = 0;

  BoundaryMesh<N> boundary() const {
    BoundaryMesh<N> mesh;
    for (const auto& s : simplices) mesh.add_face_oriented(s);
    return mesh;
  }
  double boundary_measure() const {
    double a = 0.0;
    for (const auto& s : simplices) a += simplex_measure(s);
    return a;
  }
};

namespace detail {

template <int N>
void add_oriented(SnowflakeGeneration<N>& g, const Simplex<N>& s, const Vec<N>& outward,
                  int owner) {
  Simplex<N> f = s;
  if (simplex_normal(f).dot(outward) < 0.0) std::swap(f[0], f[1]);
  g.simplices.push_back(f);
  g.owner.push_back(owner);
}

template <int N>
BlipCube<N> seed_cube(const Vec<N>& center, double side, const Vec<N>& outward) {
  BlipCube<N> q;
  q.center = center;
  q.side = side;
  q.outward = outward;
  if constexpr (N == 2) {
    q.side_dir = rot90(outward);
    q.axis_v = Vec<2>::Zero();
  } else {
    // in-plane axes of an axis-aligned face
    int axis = 0;
    for (int i = 0; i < 3; ++i)
      if (std::abs(outward[i]) > 0.5) axis = i;
    Vec<3> u = Vec<3>::Unit((axis + 1) % 3);
    Vec<3> v = Vec<3>::Unit((axis + 2) % 3);
    q.side_dir = choose_side_dir<3>(outward, u, v, Vec<3>::Unit(0));
    q.axis_v = (-outward).cross(q.side_dir);
  }
  return q;
}

inline void square_face(SnowflakeGeneration<3>& g, const Vec<3>& center, double side,
                        const Vec<3>& outward, int owner) {
  int axis = 0;
  for (int i = 0; i < 3; ++i)
    if (std::abs(outward[i]) > 0.5) axis = i;
  Vec<3> u = Vec<3>::Unit((axis + 1) % 3) * (0.5 * side);
  Vec<3> v = Vec<3>::Unit((axis + 2) % 3) * (0.5 * side);
  Vec<3> c00 = center - u - v, c10 = center + u - v, c11 = center + u + v, c01 = center - u + v;
  add_oriented<3>(g, {c00, c10, c11}, outward, owner);
  add_oriented<3>(g, {c00, c11, c01}, outward, owner);
}

// Axis-aligned rectangle {x_axis = coord} x [a0,a1] x [b0,b1] with outward
// normal sign * e_axis; (a, b) run over the other two axes in cyclic order.
inline void aa_rect(SnowflakeGeneration<3>& g, int axis, double coord, double sign, double a0,
                    double b0, double a1, double b1, int owner) {
  if (!(a1 > a0 && b1 > b0)) return;
  int ia = (axis + 1) % 3, ib = (axis + 2) % 3;
  auto mk = [&](double a, double b) {
    Vec<3> p;
    p[axis] = coord;
    p[ia] = a;
    p[ib] = b;
    return p;
  };
  Vec<3> n = sign * Vec<3>::Unit(axis);
  add_oriented<3>(g, {mk(a0, b0), mk(a1, b0), mk(a1, b1)}, n, owner);
  add_oriented<3>(g, {mk(a0, b0), mk(a1, b1), mk(a0, b1)}, n, owner);
}

inline void rect_face_z0(SnowflakeGeneration<3>& g, double x0, double y0, double x1, double y1,
                         int owner) {
  if (!(x1 > x0 && y1 > y0)) return;
  Vec<3> c00(x0, y0, 0), c10(x1, y0, 0), c11(x1, y1, 0), c01(x0, y1, 0);
  Vec<3> down(0, 0, -1);
  add_oriented<3>(g, {c00, c10, c11}, down, owner);
  add_oriented<3>(g, {c00, c11, c01}, down, owner);
}

template <int N> SnowflakeGeneration<N> seed_generation(const SnowflakeConfig<N>& cfg) {
  SnowflakeGeneration<N> g;
  if (cfg.bounded) {
    // unit cube with Q(1) as its bottom face, sitting above the seam plane
    // so the Q(1) blip coincides with the unbounded construction's.
    if constexpr (N == 2) {
      struct F {
        Vec<2> a, b, n;
      };
      const F faces[4] = {{{-0.5, 0}, {0.5, 0}, {0, -1}},
                          {{0.5, 0}, {0.5, 1}, {1, 0}},
                          {{0.5, 1}, {-0.5, 1}, {0, 1}},
                          {{-0.5, 1}, {-0.5, 0}, {-1, 0}}};
      for (int i = 0; i < 4; ++i) {
        add_oriented<2>(g, {faces[i].a, faces[i].b}, faces[i].n, i);
        g.cubes.push_back(seed_cube<2>(0.5 * (faces[i].a + faces[i].b), 1.0, faces[i].n));
      }
    } else {
      struct F {
        Vec<3> c, n;
      };
      const F faces[6] = {{{0, 0, 0}, {0, 0, -1}},   {{0, 0, 1}, {0, 0, 1}},
                          {{0.5, 0, 0.5}, {1, 0, 0}},  {{-0.5, 0, 0.5}, {-1, 0, 0}},
                          {{0, 0.5, 0.5}, {0, 1, 0}},  {{0, -0.5, 0.5}, {0, -1, 0}}};
      for (int i = 0; i < 6; ++i) {
        square_face(g, faces[i].c, 1.0, faces[i].n, i);
        g.cubes.push_back(seed_cube<3>(faces[i].c, 1.0, faces[i].n));
      }
    }
  } else {
    const double L = cfg.box_extent;
    if constexpr (N == 2) {
      Vec<2> down(0, -1);
      add_oriented<2>(g, {Vec<2>(-L, 0), Vec<2>(-0.5, 0)}, down, -1);
      add_oriented<2>(g, {Vec<2>(-0.5, 0), Vec<2>(0.5, 0)}, down, 0);
      add_oriented<2>(g, {Vec<2>(0.5, 0), Vec<2>(L, 0)}, down, -1);
      add_oriented<2>(g, {Vec<2>(L, 0), Vec<2>(L, L)}, Vec<2>(1, 0), -1);
      add_oriented<2>(g, {Vec<2>(L, L), Vec<2>(-L, L)}, Vec<2>(0, 1), -1);
      add_oriented<2>(g, {Vec<2>(-L, L), Vec<2>(-L, 0)}, Vec<2>(-1, 0), -1);
      g.cubes.push_back(seed_cube<2>(Vec<2>(0, 0), 1.0, down));
    } else {
      square_face(g, Vec<3>(0, 0, 0), 1.0, Vec<3>(0, 0, -1), 0);
      g.cubes.push_back(seed_cube<3>(Vec<3>(0, 0, 0), 1.0, Vec<3>(0, 0, -1)));
      // pinwheel ring of the seam plane between Q(1) and the box edge
      rect_face_z0(g, 0.5, -0.5, L, L, -1);
      rect_face_z0(g, -L, 0.5, 0.5, L, -1);
      rect_face_z0(g, -L, -L, -0.5, 0.5, -1);
      rect_face_z0(g, -0.5, -L, L, -0.5, -1);
      // walls and lid of the working box (y,z then z,x cyclic order)
      aa_rect(g, 0, L, 1.0, -L, 0.0, L, L, -1);
      aa_rect(g, 0, -L, -1.0, -L, 0.0, L, L, -1);
      aa_rect(g, 1, L, 1.0, 0.0, -L, L, L, -1);
      aa_rect(g, 1, -L, -1.0, 0.0, -L, L, L, -1);
      aa_rect(g, 2, L, 1.0, -L, -L, L, L, -1);
    }
  }
  return g;
}

template <int N>
BlipCube<N> map_cube(const MasterCube<N>& mc, const Placement<N>& t) {
  BlipCube<N> q;
  q.center = t.apply(mc.center);
  q.side = t.scale * mc.side;
  q.outward = t.rotate(mc.outward);
  q.side_dir = t.rotate(mc.side_dir);
  q.axis_v = t.rotate(mc.axis_v);
  return q;
}

// Sampled tent preconditions: P_Q misses the domain, ~P_Q sits inside it.
template <int N>
bool validate_blip_site(const DomainRep<N>& dom, const BlipCube<N>& q, double b, int res) {
  Placement<N> t = placement_for(q);
  DoubleTent<N> tent{b};
  for (int layer = 1; layer < res; ++layer) {
    double s = double(layer) / res;  // depth fraction toward each apex
    double half_lo = 0.5 * (1.0 - s);
    for (int i = 0; i < res; ++i) {
      for (int j = 0; j < (N == 3 ? res : 1); ++j) {
        Vec<N> m = Vec<N>::Zero();
        m[0] = half_lo * (2.0 * (i + 0.5) / res - 1.0);
        if constexpr (N == 3) m[1] = half_lo * (2.0 * (j + 0.5) / res - 1.0);
        m[N - 1] = -s * b;  // lower tent, outward side
        if (tent.in_lower(m) && dom.inside(t.apply(m))) return false;
        m[N - 1] = s * b * 0.95;  // upper tent, inside
        if (tent.in_upper_open(m) && !dom.inside(t.apply(m))) return false;
      }
    }
  }
  return true;
}

}  // namespace detail

// Builds generations Omega_0 ... Omega_depth.
template <int N>
std::vector<SnowflakeGeneration<N>> build_snowflake(const SnowflakeConfig<N>& cfg) {
  ProfileSpec spec = cfg.profile;
  spec.theta = cfg.theta;
  int freq = cfg.freq > 0 ? cfg.freq : find_frequency<N>(spec, cfg.b);
  auto psi = make_profile<N>(spec, freq);
  auto master = build_master_blip<N>(psi, cfg.b, cfg.subdiv);
  if (psi.max_height > 0.0 && master.separation < cfg.b / 100.0)
    throw GeometryError("build_snowflake: bump separation below b/100 at this frequency");

  std::vector<SnowflakeGeneration<N>> gens;
  gens.push_back(detail::seed_generation<N>(cfg));
  gens.back().freq_used = freq;

  for (int m = 0; m < cfg.depth; ++m) {
    const SnowflakeGeneration<N>& cur = gens.back();
    std::int64_t carried = 0;
    for (int o : cur.owner) carried += (o < 0);
    std::int64_t projected =
        carried + std::int64_t(cur.cubes.size()) * std::int64_t(master.mesh.size());
    if (projected > cfg.max_faces)
      throw BudgetError("build_snowflake: face budget exceeded at generation " +
                        std::to_string(m + 1));

    BoundaryMesh<N> old_mesh;
    std::unique_ptr<MeshDomain<N>> old_domain;
    if (cfg.validate || master.max_height > 0.0) {
      old_mesh = cur.boundary();
      old_mesh.build_index();
    }
    if (cfg.validate) {
      BoundaryMesh<N> copy = old_mesh;
      old_domain = std::make_unique<MeshDomain<N>>(std::move(copy));
      for (const auto& q : cur.cubes)
        if (!detail::validate_blip_site(*old_domain, q, cfg.b, cfg.validate_samples))
          throw GeometryError("build_snowflake: tent preconditions failed (sampled)");
    }

    SnowflakeGeneration<N> next;
    next.freq_used = freq;
    next.skeleton = cur.skeleton;
    next.collar_measure = cur.collar_measure;
    next.simplices.reserve(projected);
    next.owner.reserve(projected);
    for (std::size_t i = 0; i < cur.simplices.size(); ++i) {
      if (cur.owner[i] < 0) {
        next.simplices.push_back(cur.simplices[i]);
        next.owner.push_back(-1);
      }
    }
    const std::size_t first_added = next.simplices.size();
    for (const auto& q : cur.cubes) {
      Placement<N> t = placement_for(q);
      int base = int(next.cubes.size());
      for (const auto& mc : master.cubes) next.cubes.push_back(detail::map_cube(mc, t));
      for (std::size_t mi = 0; mi < master.mesh.size(); ++mi) {
        next.simplices.push_back(t.apply(master.mesh[mi]));
        next.owner.push_back(master.owner[mi] < 0 ? -1 : base + master.owner[mi]);
      }
      for (const auto& e : master.skeleton) {
        EdgeSimplex<N> mapped;
        for (std::size_t k = 0; k < mapped.v.size(); ++k) mapped.v[k] = t.apply(e.v[k]);
        next.skeleton.push_back(mapped);
      }
      double scale_d = std::pow(t.scale, N - 1);
      next.collar_measure += scale_d * master.collar_measure;
    }

    // Hausdorff increment: the two boundaries coincide outside the blip
    // regions, so only removed cube faces and placed graphs contribute.
    if (master.max_height > 0.0) {
      BoundaryMesh<N> new_mesh = next.boundary();
      new_mesh.build_index();
      double sup = 0.0;
      for (std::size_t i = 0; i < cur.simplices.size(); ++i) {
        if (cur.owner[i] < 0) continue;
        double spacing = cur.cubes[cur.owner[i]].side * psi.support_radius * 0.5;
        sample_simplex(cur.simplices[i], std::max(spacing, 1e-9),
                       [&](const Vec<N>& p) { sup = std::max(sup, new_mesh.distance(p)); });
      }
      for (std::size_t i = first_added; i < next.simplices.size(); ++i) {
        // vertices of placed graphs carry the extremes
        for (int k = 0; k < N; ++k)
          sup = std::max(sup, old_mesh.distance(next.simplices[i][k]));
      }
      next.hausdorff_increment = sup;
    }
    gens.push_back(std::move(next));
  }
  return gens;
}

}  // namespace rflab
