#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <vector>

#include "rflab/core/bvh.hpp"
#include "rflab/core/domain.hpp"
#include "rflab/core/rng.hpp"
#include "rflab/core/types.hpp"

// Whitney-type decompositions: maximal dyadic cubes Q inside an open set
// with diam(KQ) <= r0 and KQ disjoint from the complement.
namespace rflab {

struct DepthLimitError : GeometryError {
  using GeometryError::GeometryError;
};
struct EmptyFamilyError : GeometryError {
  using GeometryError::GeometryError;
};

// Open set oracle: an inside predicate plus a conservative distance bound.
// complement_in_box is the exact admissibility test when available.
template <int N> class OpenSetOracle {
 public:
  virtual ~OpenSetOracle() = default;
  virtual bool inside(const Vec<N>& p) const = 0;
  virtual double dist_lower(const Vec<N>& p) const = 0;
  virtual std::optional<bool> complement_in_box(const Box<N>& b) const {
    (void)b;
    return std::nullopt;
  }
  // True when the box provably misses the open set (prunes dead subtrees).
  virtual bool box_misses_set(const Box<N>& b) const {
    (void)b;
    return false;
  }
};

template <int N> class DomainOracle : public OpenSetOracle<N> {
 public:
  explicit DomainOracle(const DomainRep<N>& dom) : dom_(dom) {}
  bool inside(const Vec<N>& p) const override { return dom_.inside(p); }
  double dist_lower(const Vec<N>& p) const override { return dom_.dist_lower(p); }
  std::optional<bool> complement_in_box(const Box<N>& b) const override {
    return dom_.complement_in_box(b);
  }
  bool box_misses_set(const Box<N>& b) const override {
    // A box disjoint from the boundary carrier lies wholly on one side.
    if (dom_.inside(b.center())) return false;
    if (const auto* m = dom_.mesh()) return !m->any_face_in_box(b);
    return dom_.boundary_distance(b.center()) > 0.5 * b.diagonal().norm();
  }

 private:
  const DomainRep<N>& dom_;
};

// Complement of a finite point set E; all tests are exact.
template <int N> class PointComplementOracle : public OpenSetOracle<N> {
 public:
  explicit PointComplementOracle(std::vector<Vec<N>> pts) : index_(std::move(pts)) {}

  bool inside(const Vec<N>& p) const override { return index_.distance(p) > 0.0; }
  double dist_lower(const Vec<N>& p) const override { return index_.distance(p); }
  std::optional<bool> complement_in_box(const Box<N>& b) const override {
    bool hit = false;
    index_.for_each_in_box(b, [&](int) { hit = true; });
    return hit;
  }
  const PointIndex<N>& index() const { return index_; }

 private:
  PointIndex<N> index_;
};

// The 2^N dyadic quadrant cubes forming [-side, side)^N with side = 2^-level.
template <int N> std::vector<DyadicCube<N>> centered_roots(int level) {
  std::vector<DyadicCube<N>> roots;
  for (int c = 0; c < (1 << N); ++c) {
    DyadicCube<N> q;
    q.level = level;
    for (int i = 0; i < N; ++i) q.corner[i] = ((c >> i) & 1) ? 0 : -1;
    roots.push_back(q);
  }
  return roots;
}

template <int N> struct WhitneyConfig {
  double K = 4.0;  // dilation factor, >= 4
  double r0 = kInf;
  std::vector<DyadicCube<N>> roots = centered_roots<N>(-3);  // [-8,8)^N
  int max_level = 16;
  bool allow_truncation = false;  // record truncated subtrees instead of erroring

  Box<N> region() const {
    Box<N> b;
    b.setEmpty();
    for (const auto& r : roots) b.extend(r.box());
    return b;
  }
};

template <int N> struct WhitneyDecomposition {
  std::vector<DyadicCube<N>> cubes;
  WhitneyConfig<N> config;
  std::int64_t truncated = 0;  // subtrees still inadmissible at max_level
};

namespace detail {

// Certificate-based admissibility. Exact when the oracle provides a box
// test; otherwise a distance certificate with a corner-grid refinement.
template <int N>
bool cube_admissible_impl(const OpenSetOracle<N>& oracle, const DyadicCube<N>& q, double K,
                          double r0) {
  if (K * q.diam() > r0) return false;
  Box<N> kq = q.dilated_box(K);
  if (auto exact = oracle.complement_in_box(kq)) return !*exact;
  // Fast path: circumball certificate from the center.
  double need = 0.5 * K * q.diam();
  if (oracle.dist_lower(q.center()) > need) return true;
  // Grid refinement: any outside sample refutes; a covering of KQ by
  // dist_lower balls certifies.
  for (int g = 2; g <= 33; g = 2 * g - 1) {
    bool covered = true;
    double h = kq.sizes().maxCoeff() / double(g - 1);
    double cover_radius = 0.5 * h * std::sqrt(double(N));
    std::vector<int> idx(N, 0);
    for (;;) {
      Vec<N> p;
      for (int i = 0; i < N; ++i)
        p[i] = kq.min()[i] + (kq.sizes()[i] / double(g - 1)) * idx[i];
      if (!oracle.inside(p)) return false;
      if (oracle.dist_lower(p) <= cover_radius) covered = false;
      int axis = 0;
      while (axis < N && ++idx[axis] == g) idx[axis++] = 0;
      if (axis == N) break;
    }
    if (covered) return true;
  }
  return false;  // conservative: treat unresolved as inadmissible
}

}  // namespace detail

template <int N>
bool cube_admissible(const OpenSetOracle<N>& oracle, const DyadicCube<N>& q,
                     const WhitneyConfig<N>& cfg) {
  return detail::cube_admissible_impl(oracle, q, cfg.K, cfg.r0);
}

// Membership in the Whitney family: admissible with an inadmissible parent.
template <int N>
bool whitney_member(const OpenSetOracle<N>& oracle, const DyadicCube<N>& q,
                    const WhitneyConfig<N>& cfg) {
  return cube_admissible(oracle, q, cfg) && !cube_admissible(oracle, q.parent(), cfg);
}

// Enumerate the decomposition inside cfg.bbox. `subtree_filter` prunes
// subtrees that cannot contain cubes of interest (it must be monotone: if it
// rejects a box it rejects all sub-boxes).
template <int N>
WhitneyDecomposition<N> decompose(
    const OpenSetOracle<N>& oracle, const WhitneyConfig<N>& cfg,
    const std::function<bool(const Box<N>&)>& subtree_filter = {}) {
  WhitneyDecomposition<N> out;
  out.config = cfg;

  std::vector<DyadicCube<N>> stack;
  for (const auto& root : cfg.roots) {
    // An admissible root climbs to its maximal admissible ancestor; roots in
    // distinct quadrants can never climb to the same cube.
    if (cube_admissible(oracle, root, cfg)) {
      DyadicCube<N> q = root;
      while (cube_admissible(oracle, q.parent(), cfg)) q = q.parent();
      out.cubes.push_back(q);
    } else {
      stack.push_back(root);
    }
  }
  while (!stack.empty()) {
    DyadicCube<N> q = stack.back();
    stack.pop_back();
    for (int c = 0; c < DyadicCube<N>::n_children(); ++c) {
      DyadicCube<N> child = q.child(c);
      if (subtree_filter && !subtree_filter(child.box())) continue;
      if (oracle.box_misses_set(child.box())) continue;
      if (cube_admissible(oracle, child, cfg)) {
        out.cubes.push_back(child);
      } else if (child.level < cfg.max_level) {
        stack.push_back(child);
      } else {
        ++out.truncated;
      }
    }
  }
  std::sort(out.cubes.begin(), out.cubes.end());
  if (out.cubes.empty() && out.truncated > 0 && !cfg.allow_truncation)
    throw DepthLimitError("decompose: no admissible cube above max_level");
  return out;
}

template <int N> struct WhitneyReport {
  // (a) range of l(Q) * K / min(r0, dist(x, complement)) over sampled x in Q
  double prop_a_min = kInf, prop_a_max = 0.0;
  // (b) max sidelength ratio over pairs with touching (K/4)-dilates
  double prop_b_max_ratio = 1.0;
  // (c) max overlap count of {(K/4)Q} at sampled points of the open set
  int prop_c_max_overlap = 0;
  std::int64_t pairs_checked = 0;
};

// Measured versions of the three classical Whitney properties.
template <int N>
WhitneyReport<N> verify_properties(const WhitneyDecomposition<N>& w,
                                   const OpenSetOracle<N>& oracle,
                                   const DomainRep<N>* true_dist_domain, int samples,
                                   std::uint64_t seed = 1) {
  WhitneyReport<N> rep;
  if (w.cubes.empty()) return rep;
  const double K = w.config.K;

  Philox rng(seed, 0);
  // (a): sample points inside cubes; use the exact boundary distance when a
  // domain is supplied, the oracle lower bound otherwise.
  int per_cube = std::max(1, int(samples / std::max<std::size_t>(1, w.cubes.size())));
  for (const auto& q : w.cubes) {
    for (int s = 0; s < per_cube; ++s) {
      Vec<N> x = uniform_in_box(q.box(), rng);
      double dist = true_dist_domain ? true_dist_domain->boundary_distance(x)
                                     : oracle.dist_lower(x);
      double denom = std::min(w.config.r0, dist);
      if (denom <= 0.0) continue;
      double v = q.side() * K / denom;
      rep.prop_a_min = std::min(rep.prop_a_min, v);
      rep.prop_a_max = std::max(rep.prop_a_max, v);
    }
  }

  // (b): pairs with intersecting (K/4)-dilates via a box tree.
  Bvh<N> tree;
  {
    std::vector<Box<N>> boxes;
    boxes.reserve(w.cubes.size());
    for (const auto& q : w.cubes) boxes.push_back(q.dilated_box(K / 4.0));
    tree.build(std::move(boxes));
  }
  for (std::size_t i = 0; i < w.cubes.size(); ++i) {
    Box<N> b = w.cubes[i].dilated_box(K / 4.0);
    tree.for_each_overlap(b, [&](int j) {
      if (std::size_t(j) <= i) return;
      ++rep.pairs_checked;
      double ratio = w.cubes[i].side() / w.cubes[j].side();
      if (ratio < 1.0) ratio = 1.0 / ratio;
      rep.prop_b_max_ratio = std::max(rep.prop_b_max_ratio, ratio);
    });
  }

  // (c): overlap counts at random points of the open set within the region.
  Box<N> bb = w.config.region();
  for (int s = 0; s < samples; ++s) {
    Vec<N> x = uniform_in_box(bb, rng);
    if (!oracle.inside(x)) continue;
    int count = 0;
    tree.for_each_overlap(Box<N>(x, x), [&](int j) {
      if (w.cubes[j].dilated_box(K / 4.0).contains(x)) ++count;
    });
    rep.prop_c_max_overlap = std::max(rep.prop_c_max_overlap, count);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Boundary family: cubes of the Whitney decomposition of E^c that meet the
// domain boundary, each carrying a boundary point z_Q and the ball
// B(z_Q, eps * min(r0, dist(z_Q, E))).
// ---------------------------------------------------------------------------

template <int N> struct BallFamilyEntry {
  DyadicCube<N> cube;
  Vec<N> z = Vec<N>::Zero();
  double r = 0.0;
  Ball<N> ball() const { return {z, r}; }
};

template <int N> struct BallFamily {
  std::vector<BallFamilyEntry<N>> entries;
  double epsilon = 0.0;
  double K = 0.0;  // the rounded dilation factor actually used
  double r0 = kInf;
  double sample_spacing = 0.0;  // covering radius of the boundary sample used
  // measured ratio l(Q) / (eps * r_Q) range
  double c_low = kInf, c_high = 0.0;
  std::int64_t truncated = 0;

  std::vector<Ball<N>> balls() const {
    std::vector<Ball<N>> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.ball());
    return out;
  }
};

template <int N> struct BoundaryFamilyOptions {
  std::vector<DyadicCube<N>> roots = centered_roots<N>(-3);
  int max_level = 24;
  double r0 = kInf;
  // local boundary sampling refinement relative to the cube side
  double local_spacing_frac = 0.125;
  // desk-scale fixtures run at eps up to 1/25; the classical smallness
  // threshold is 1/100
  double epsilon_max = 0.0625;
};

template <int N>
BallFamily<N> boundary_family(const DomainRep<N>& domain, const std::vector<Vec<N>>& e_sample,
                              double epsilon, const BoundaryFamilyOptions<N>& opt = {}) {
  if (e_sample.empty()) throw GeometryError("boundary_family: empty E sample");
  if (!(epsilon > 0.0 && epsilon < opt.epsilon_max))
    throw GeometryError("boundary_family: epsilon out of range");

  PointComplementOracle<N> oracle{std::vector<Vec<N>>(e_sample)};
  WhitneyConfig<N> cfg;
  cfg.K = ceil_pow2(1.0 / (epsilon * epsilon));
  cfg.r0 = opt.r0;
  cfg.roots = opt.roots;
  cfg.max_level = opt.max_level;
  cfg.allow_truncation = true;

  const BoundaryMesh<N>* mesh = domain.mesh();

  // Only subtrees near the boundary can contain cubes of the family. A cube
  // can meet the boundary only if the boundary carrier meets its box.
  std::function<bool(const Box<N>&)> filter = [&](const Box<N>& b) {
    if (mesh) return mesh->any_face_in_box(b);
    Vec<N> c = b.center();
    return domain.boundary_distance(c) <= 0.5 * b.diagonal().norm() + 1e-15;
  };

  auto dec = decompose(oracle, cfg, filter);

  BallFamily<N> fam;
  fam.epsilon = epsilon;
  fam.K = cfg.K;
  fam.r0 = opt.r0;
  fam.truncated = dec.truncated;

  for (const auto& q : dec.cubes) {
    // Pick z_Q: nearest boundary point to the cube center among a local
    // boundary sample restricted to Q; skip cubes missing the boundary.
    double spacing = q.side() * opt.local_spacing_frac;
    fam.sample_spacing = std::max(fam.sample_spacing, spacing);
    Vec<N> center = q.center();
    Vec<N> best = Vec<N>::Zero();
    double best_d = kInf;
    auto consider = [&](const Vec<N>& p) {
      if (!q.contains(p)) return;
      double d = (p - center).squaredNorm();
      if (d < best_d - 1e-18 * (1 + d)) {
        best_d = d;
        best = p;
      } else if (d <= best_d + 1e-18 * (1 + d)) {
        // deterministic lexicographic tie-break
        for (int i = 0; i < N; ++i) {
          if (p[i] < best[i]) {
            best = p;
            break;
          }
          if (p[i] > best[i]) break;
        }
      }
    };
    if (mesh) {
      mesh->for_each_face_in_box(q.box(), [&](int fi) {
        sample_simplex(mesh->faces()[fi], spacing, consider);
      });
    } else {
      // sample the abstract boundary through nearest-point projections
      Vec<N> p = domain.nearest_boundary(center);
      consider(p);
    }
    if (!(best_d < kInf)) continue;  // cube does not meet the sampled boundary

    BallFamilyEntry<N> entry;
    entry.cube = q;
    entry.z = best;
    double dist_e = oracle.index().distance(best);
    entry.r = epsilon * std::min(opt.r0, dist_e);
    if (entry.r <= 0.0) continue;
    fam.entries.push_back(entry);
    double ratio = q.side() / (epsilon * entry.r);
    fam.c_low = std::min(fam.c_low, ratio);
    fam.c_high = std::max(fam.c_high, ratio);
  }

  if (fam.entries.empty())
    throw EmptyFamilyError("boundary_family: E covers the boundary at sampling tolerance");
  return fam;
}

}  // namespace rflab
