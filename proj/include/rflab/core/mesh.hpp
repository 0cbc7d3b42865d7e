#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rflab/core/bvh.hpp"
#include "rflab/core/simplex.hpp"
#include "rflab/core/types.hpp"

namespace rflab {

// Discrete carrier for a domain boundary: a set of d-simplices with outward
// orientation, a spatial index for exact nearest-simplex queries, and an
// angle-weighted pseudonormal test for inside/outside classification.
template <int N> class BoundaryMesh {
 public:
  BoundaryMesh() = default;

  void add_face(const Simplex<N>& s, const Vec<N>& outward) {
    Simplex<N> f = s;
    if (simplex_normal(f).dot(outward) < 0.0) std::swap(f[0], f[1]);
    faces_.push_back(f);
    dirty_ = true;
  }

  // Orientation taken from vertex order.
  void add_face_oriented(const Simplex<N>& s) {
    faces_.push_back(s);
    dirty_ = true;
  }

  const std::vector<Simplex<N>>& faces() const { return faces_; }
  std::size_t size() const { return faces_.size(); }
  bool empty() const { return faces_.empty(); }
  Vec<N> normal(std::size_t i) const { return simplex_normal(faces_[i]); }

  double total_measure() const {
    double a = 0.0;
    for (const auto& f : faces_) a += simplex_measure(f);
    return a;
  }

  Box<N> bounds() const {
    Box<N> b;
    b.setEmpty();
    for (const auto& f : faces_) b.extend(simplex_box(f));
    return b;
  }

  void build_index() const {
    if (!dirty_) return;
    std::vector<Box<N>> boxes;
    boxes.reserve(faces_.size());
    for (const auto& f : faces_) boxes.push_back(simplex_box(f));
    tree_.build(std::move(boxes));
    build_adjacency();
    dirty_ = false;
  }

  struct Closest {
    double dist = kInf;
    Vec<N> point = Vec<N>::Zero();
    int face = -1;
  };

  Closest closest(const Vec<N>& p) const {
    build_index();
    Closest out;
    Vec<N> cp;
    auto [idx, d2] = tree_.nearest_sq(p, [&](int i) {
      Vec<N> c;
      double d = sq_dist_point_simplex(p, faces_[i], &c);
      return d;
    });
    if (idx >= 0) {
      sq_dist_point_simplex(p, faces_[idx], &cp);
      out.dist = std::sqrt(d2);
      out.point = cp;
      out.face = idx;
    }
    return out;
  }

  double distance(const Vec<N>& p) const { return closest(p).dist; }

  // Signed distance via the angle-weighted pseudonormal of the nearest
  // feature (negative inside). Valid for watertight orientable carriers;
  // hanging vertices on coplanar refinements are harmless.
  double signed_distance(const Vec<N>& p) const {
    Closest c = closest(p);
    if (c.face < 0) return kInf;
    Vec<N> n = pseudonormal_at(c.face, c.point);
    double s = n.dot(p - c.point);
    return s >= 0.0 ? c.dist : -c.dist;
  }

  bool inside(const Vec<N>& p) const { return signed_distance(p) < 0.0; }

  std::vector<Vec<N>> sample(double spacing) const {
    std::vector<Vec<N>> pts;
    for (const auto& f : faces_)
      sample_simplex(f, spacing, [&](const Vec<N>& q) { pts.push_back(q); });
    return pts;
  }

  template <class Fn> void for_each_face_in_box(const Box<N>& b, Fn&& fn) const {
    build_index();
    tree_.for_each_overlap(b, [&](int i) {
      if (box_overlaps_simplex(b, faces_[i])) fn(i);
    });
  }

  bool any_face_in_box(const Box<N>& b) const {
    build_index();
    bool hit = false;
    tree_.for_each_overlap(b, [&](int i) {
      if (!hit && box_overlaps_simplex(b, faces_[i])) hit = true;
    });
    return hit;
  }

  void write_off(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw GeometryError("cannot open " + path);
    out << "OFF\n";
    std::map<std::array<std::int64_t, 3>, int> vid;
    std::vector<Vec<N>> verts;
    std::vector<std::array<int, N>> face_ids(faces_.size());
    for (std::size_t fi = 0; fi < faces_.size(); ++fi)
      for (int k = 0; k < N; ++k) {
        auto key = quantize(faces_[fi][k]);
        auto it = vid.find(key);
        if (it == vid.end()) {
          it = vid.emplace(key, int(verts.size())).first;
          verts.push_back(faces_[fi][k]);
        }
        face_ids[fi][k] = it->second;
      }
    out << verts.size() << ' ' << faces_.size() << " 0\n";
    char buf[96];
    for (const auto& v : verts) {
      double z = N == 3 ? v[2] : 0.0;
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v[0], v[1], z);
      out << buf;
    }
    for (const auto& f : face_ids) {
      out << N;
      for (int k = 0; k < N; ++k) out << ' ' << f[k];
      out << '\n';
    }
  }

  static BoundaryMesh read_off(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GeometryError("cannot open " + path);
    std::string header;
    in >> header;
    if (header != "OFF") throw GeometryError("not an OFF file: " + path);
    std::size_t nv = 0, nf = 0, ne = 0;
    in >> nv >> nf >> ne;
    std::vector<Vec<N>> verts(nv);
    for (std::size_t i = 0; i < nv; ++i) {
      double x, y, z;
      in >> x >> y >> z;
      verts[i][0] = x;
      verts[i][1] = y;
      if constexpr (N == 3) verts[i][2] = z;
    }
    BoundaryMesh mesh;
    for (std::size_t i = 0; i < nf; ++i) {
      int k;
      in >> k;
      if (k != N) throw GeometryError("face arity mismatch in " + path);
      Simplex<N> s;
      for (int j = 0; j < N; ++j) {
        int id;
        in >> id;
        s[j] = verts.at(id);
      }
      mesh.add_face_oriented(s);
    }
    return mesh;
  }

 private:
  static std::array<std::int64_t, 3> quantize(const Vec<N>& v) {
    std::array<std::int64_t, 3> key{0, 0, 0};
    for (int i = 0; i < N; ++i) key[i] = std::llround(v[i] * 0x1.0p32);
    return key;
  }

  // (d-1)-face key: one endpoint for segments, a sorted vertex pair for
  // triangle edges.
  using SubKey = std::array<std::array<std::int64_t, 3>, N - 1>;

  void build_adjacency() const {
    adjacency_.clear();
    vertex_adjacency_.clear();
    for (std::size_t fi = 0; fi < faces_.size(); ++fi) {
      for (int k = 0; k < N; ++k) {
        SubKey key = subface_key(faces_[fi], k);
        adjacency_[key].push_back(int(fi));
      }
      if constexpr (N == 3) {
        for (int k = 0; k < N; ++k)
          vertex_adjacency_[quantize(faces_[fi][k])].push_back(int(fi));
      }
    }
  }

  static SubKey subface_key(const Simplex<N>& f, int omit) {
    SubKey key;
    int j = 0;
    for (int i = 0; i < N; ++i)
      if (i != omit) key[j++] = quantize(f[i]);
    if constexpr (N == 3) {
      if (key[1] < key[0]) std::swap(key[0], key[1]);
    }
    return key;
  }

  Vec<N> pseudonormal_at(int face, const Vec<N>& point) const {
    const Simplex<N>& f = faces_[face];
    // Locate the feature the closest point lies on.
    double scale = std::max(1e-300, std::sqrt(simplex_measure(f)) + (f[0] - point).norm());
    double tol = 1e-9 * scale;
    int on_vertex = -1;
    for (int i = 0; i < N; ++i)
      if ((f[i] - point).norm() <= tol) on_vertex = i;
    if constexpr (N == 2) {
      if (on_vertex < 0) return simplex_normal(f);
      return feature_normal(subface_key(f, 1 - on_vertex));
    } else {
      if (on_vertex >= 0) {
        // Angle-weighted average over all faces sharing the vertex.
        auto vkey = quantize(f[on_vertex]);
        Vec<3> acc = Vec<3>::Zero();
        auto it = vertex_adjacency_.find(vkey);
        if (it != vertex_adjacency_.end())
          for (int fi : it->second)
            acc += vertex_angle(faces_[fi], vkey) * simplex_normal(faces_[fi]);
        double len = acc.norm();
        return len > 0 ? Vec<3>(acc / len) : simplex_normal(f);
      }
      // Edge feature: distance from point to each edge line.
      for (int k = 0; k < N; ++k) {
        const Vec<3>& a = f[(k + 1) % 3];
        const Vec<3>& b = f[(k + 2) % 3];
        if (sq_dist_point_segment3(point, a, b) <= tol * tol)
          return feature_normal(subface_key(f, k));
      }
      return simplex_normal(f);
    }
  }

  Vec<N> feature_normal(const SubKey& key) const {
    auto it = adjacency_.find(key);
    if (it == adjacency_.end()) return Vec<N>::Zero();
    Vec<N> acc = Vec<N>::Zero();
    for (int fi : it->second) acc += simplex_normal(faces_[fi]);
    double len = acc.norm();
    if (len > 0) return acc / len;
    return simplex_normal(faces_[it->second.front()]);
  }

  static double vertex_angle(const Simplex<3>& f, const std::array<std::int64_t, 3>& vkey) {
    int at = 0;
    for (int i = 0; i < 3; ++i)
      if (quantize(f[i]) == vkey) at = i;
    Vec<3> u = f[(at + 1) % 3] - f[at];
    Vec<3> v = f[(at + 2) % 3] - f[at];
    double c = u.dot(v) / std::max(1e-300, u.norm() * v.norm());
    return std::acos(std::clamp(c, -1.0, 1.0));
  }

  std::vector<Simplex<N>> faces_;
  mutable Bvh<N> tree_;
  mutable std::map<SubKey, std::vector<int>> adjacency_;
  mutable std::map<std::array<std::int64_t, 3>, std::vector<int>> vertex_adjacency_;
  mutable bool dirty_ = true;
};

}  // namespace rflab
