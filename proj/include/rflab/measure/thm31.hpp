#pragma once

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "rflab/enlarge/enlarge.hpp"
#include "rflab/harmonic/wos.hpp"

// Surface-area accounting for the enlarged domain: patch areas by
// quadrature and the locally-finite-measure bound, comparing the summed
// patch areas inside a ball against r^alpha mu(B(xi, Cr)).
namespace rflab {

struct OverlapError : GeometryError {
  using GeometryError::GeometryError;
};

// Radon-measure provider abstraction: synthetic measures give noise-free
// verification; shared-walk harmonic estimates plug in for integration runs.
template <int N> class MeasureProvider {
 public:
  virtual ~MeasureProvider() = default;
  virtual double mass(const Ball<N>& b) const = 0;
};

template <int N> class PointMassMeasure : public MeasureProvider<N> {
 public:
  PointMassMeasure(std::vector<Vec<N>> atoms, std::vector<double> weights)
      : atoms_(std::move(atoms)), weights_(std::move(weights)) {}
  double mass(const Ball<N>& b) const override {
    double m = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i)
      if ((atoms_[i] - b.center).norm() <= b.radius) m += weights_[i];
    return m;
  }

 private:
  std::vector<Vec<N>> atoms_;
  std::vector<double> weights_;
};

template <int N> class PowerLawMeasure : public MeasureProvider<N> {
 public:
  PowerLawMeasure(Vec<N> center, double exponent, double scale = 1.0)
      : center_(std::move(center)), exponent_(exponent), scale_(scale) {}
  double mass(const Ball<N>& b) const override {
    double reach = b.radius - (b.center - center_).norm();
    if (reach <= 0.0) return 0.0;
    return scale_ * std::pow(reach, exponent_);
  }

 private:
  Vec<N> center_;
  double exponent_;
  double scale_;
};

// Empirical measure of a fixed set of walk exits (deterministic given the
// run that produced them).
template <int N> class ExitCloudMeasure : public MeasureProvider<N> {
 public:
  explicit ExitCloudMeasure(std::vector<Vec<N>> exits) : exits_(std::move(exits)) {
    index_.build(std::vector<Vec<N>>(exits_));
  }
  double mass(const Ball<N>& b) const override {
    std::int64_t hits = 0;
    index_.for_each_in_box(b.box(), [&](int i) {
      if ((index_.points()[i] - b.center).norm() <= b.radius) ++hits;
    });
    return double(hits) / double(exits_.size());
  }

 private:
  std::vector<Vec<N>> exits_;
  PointIndex<N> index_;
};

// Lower-bound certificate mu(B(xi, r)) >= c_mu r^{d-alpha} on E.
template <int N> struct LowerBoundCert {
  double c_mu = 0.0;
  double alpha = 0.0;
  double r0 = 0.0;
  double worst_ratio = kInf;  // min of mu(B)/ (c_mu r^{d-alpha}); >= 1 passes
  bool ok = false;
};

template <int N>
LowerBoundCert<N> lower_bound_cert(const MeasureProvider<N>& mu, const std::vector<Vec<N>>& e_pts,
                                   double c_mu, double alpha, double r0, int dyadic_levels) {
  const int d = N - 1;
  LowerBoundCert<N> cert;
  cert.c_mu = c_mu;
  cert.alpha = alpha;
  cert.r0 = r0;
  for (const auto& xi : e_pts)
    for (int j = 0; j < dyadic_levels; ++j) {
      double r = r0 * std::ldexp(1.0, -j);
      double need = c_mu * std::pow(r, double(d) - alpha);
      cert.worst_ratio = std::min(cert.worst_ratio, mu.mass(Ball<N>{xi, r}) / need);
    }
  cert.ok = cert.worst_ratio >= 1.0;
  return cert;
}

// ---------------------------------------------------------------------------
// Patch areas by quadrature: integral of sqrt(1 + |grad f_Q|^2) over
// L_Q cap 10 B_Q, optionally clipped to a ball.
// ---------------------------------------------------------------------------

template <int N>
double patch_area(const GraphPatch<N>& patch, int panels = 2048,
                  const Ball<N>* clip = nullptr) {
  const double extent = 10.0 * patch.q.r;
  double acc = 0.0;
  if constexpr (N == 2) {
    double h = 2.0 * extent / panels;
    for (int i = 0; i < panels; ++i) {
      Vec<1> xt;
      xt[0] = -extent + (i + 0.5) * h;
      double g = patch.grad_norm(xt);
      if (clip) {
        Vec<2> world = patch.to_world(xt, patch.eval(xt).height);
        if (!clip->contains(world)) continue;
      }
      acc += h * std::sqrt(1.0 + g * g);
    }
  } else {
    // polar rule over the disk: smooth mapping keeps midpoint order two
    int rings = panels;
    int wedges = 4 * panels;
    double hr = extent / rings;
    double ht = 2.0 * M_PI / wedges;
    for (int i = 0; i < rings; ++i) {
      double rho = (i + 0.5) * hr;
      for (int j = 0; j < wedges; ++j) {
        double a = (j + 0.5) * ht;
        Vec<2> xt(rho * std::cos(a), rho * std::sin(a));
        double g = patch.grad_norm(xt);
        if (clip) {
          Vec<3> world = patch.to_world(xt, patch.eval(xt).height);
          if (!clip->contains(world)) continue;
        }
        acc += rho * hr * ht * std::sqrt(1.0 + g * g);
      }
    }
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Theorem 3.1 style verifier.
// ---------------------------------------------------------------------------

template <int N> struct Thm31Options {
  PatchOptions<N> patch{};
  int area_panels = 512;
  double overlap_cap = 1e6;  // hard error only on runaway overlap
};

template <int N> struct Thm31Report {
  double r = 0.0;
  int case_id = 0;  // 1: dist(xi, E) >= 2r, else 2
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double c_enlargement = 1.0;  // measured C with every B^Q inside B(xi, Cr)
  int level_spread = 0;        // case 1 comparability: generations spanned
  struct PerScale {
    int level = 0;
    int count = 0;
    int max_overlap = 0;
    double lhs_n = 0.0;
  };
  std::vector<PerScale> per_scale;
  int n1_max_overlap = 0;
};

// Caches patches across the radius sweep.
template <int N> class Thm31Verifier {
 public:
  Thm31Verifier(std::shared_ptr<const EnlargedDomain<N>> dom, const MeasureProvider<N>& mu,
                Thm31Options<N> opt = {})
      : dom_(std::move(dom)), mu_(mu), opt_(opt) {}

  Thm31Report<N> verify(const Vec<N>& xi, double r, double alpha) {
    const auto& fam = dom_->family();
    Thm31Report<N> rep;
    rep.r = r;

    PointIndex<N> e_index{std::vector<Vec<N>>(dom_->e_points())};
    double dist_e = e_index.empty() ? kInf : e_index.distance(xi);
    rep.case_id = dist_e >= 2.0 * r ? 1 : 2;

    // candidate cubes: the patch of Q can reach B(xi, r)
    std::vector<int> in_c;
    Box<N> query(xi, xi);
    double pad = r + 10.5 * max_radius();
    query.min().array() -= pad;
    query.max().array() += pad;
    dom_->for_each_ball_overlapping(query, [&](int i) {
      const auto& e = fam.entries[i];
      if ((e.z - xi).norm() > 10.5 * e.r + r) return;
      if (patch_reaches(i, xi, r)) in_c.push_back(i);
    });
    std::sort(in_c.begin(), in_c.end());

    std::map<int, typename Thm31Report<N>::PerScale> per;
    int lvl_min = 1 << 30, lvl_max = -(1 << 30);
    for (int i : in_c) {
      const auto& e = fam.entries[i];
      const GraphPatch<N>& patch = cached_patch(i);
      Ball<N> clip{xi, r};
      double area = patch_area<N>(patch, opt_.area_panels, &clip);
      rep.lhs += area;
      // xi_Q: nearest E point to the cube, B^Q = B(xi_Q, l(Q))
      Vec<N> xi_q = xi;
      if (!e_index.empty()) {
        auto [ei, d2] = e_index.nearest_sq(e.cube.center());
        (void)d2;
        xi_q = e_index.points()[ei];
      }
      double ell = e.cube.side();
      rep.c_enlargement = std::max(rep.c_enlargement, ((xi_q - xi).norm() + ell) / r);
      auto& slot = per[e.cube.level];
      slot.level = e.cube.level;
      slot.count += 1;
      slot.lhs_n += area;
      lvl_min = std::min(lvl_min, e.cube.level);
      lvl_max = std::max(lvl_max, e.cube.level);
      xi_q_of_[i] = xi_q;
    }
    rep.level_spread = in_c.empty() ? 0 : lvl_max - lvl_min;

    // per-scale overlap of {B^Q} over E points
    for (auto& [lvl, slot] : per) {
      for (const auto& zeta : dom_->e_points()) {
        int overlap = 0;
        for (int i : in_c) {
          const auto& e = fam.entries[i];
          if (e.cube.level != lvl) continue;
          if ((zeta - xi_q_of_[i]).norm() < e.cube.side()) ++overlap;
        }
        slot.max_overlap = std::max(slot.max_overlap, overlap);
      }
      rep.n1_max_overlap = std::max(rep.n1_max_overlap, slot.max_overlap);
      rep.per_scale.push_back(slot);
    }
    if (rep.n1_max_overlap > opt_.overlap_cap)
      throw OverlapError("thm31: per-scale overlap exceeded the cap");

    rep.rhs = std::pow(r, alpha) * mu_.mass(Ball<N>{xi, rep.c_enlargement * r});
    rep.ratio = rep.rhs > 0 ? rep.lhs / rep.rhs : kInf;
    return rep;
  }

  const GraphPatch<N>& cached_patch(int i) {
    auto it = patches_.find(i);
    if (it == patches_.end())
      it = patches_.emplace(i, build_patch<N>(*dom_, i, opt_.patch)).first;
    return it->second;
  }

 private:
  double max_radius() const {
    double m = 0.0;
    for (const auto& e : dom_->family().entries) m = std::max(m, e.r);
    return m;
  }

  bool patch_reaches(int i, const Vec<N>& xi, double r) {
    const GraphPatch<N>& patch = cached_patch(i);
    const double extent = 10.0 * patch.q.r;
    int grid = 32;
    if constexpr (N == 2) {
      for (int k = 0; k <= grid; ++k) {
        Vec<1> xt;
        xt[0] = -extent + 2.0 * extent * k / grid;
        if ((patch.to_world(xt, patch.eval(xt).height) - xi).norm() <= r) return true;
      }
    } else {
      for (int a = 0; a <= grid; ++a)
        for (int b = 0; b <= grid; ++b) {
          Vec<2> xt(-extent + 2.0 * extent * a / grid, -extent + 2.0 * extent * b / grid);
          if (xt.norm() > extent) continue;
          if ((patch.to_world(xt, patch.eval(xt).height) - xi).norm() <= r) return true;
        }
    }
    return false;
  }

  std::shared_ptr<const EnlargedDomain<N>> dom_;
  const MeasureProvider<N>& mu_;
  Thm31Options<N> opt_;
  std::map<int, GraphPatch<N>> patches_;
  std::map<int, Vec<N>> xi_q_of_;
};

}  // namespace rflab
