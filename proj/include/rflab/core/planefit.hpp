#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rflab/core/rng.hpp"
#include "rflab/core/types.hpp"

namespace rflab {

template <int N> struct PlaneFit {
  Hyperplane<N> plane;
  double residual = 0.0;  // max orthogonal deviation
  bool degenerate = false;
};

namespace detail {

// Max |<p - anchor, n>| over the sample, with the offset chosen optimally
// when no anchor is prescribed.
template <int N>
double sup_deviation(std::span<const Vec<N>> pts, const Vec<N>& normal,
                     const std::optional<Vec<N>>& anchor, double* offset_out) {
  double lo = kInf, hi = -kInf;
  for (const auto& p : pts) {
    double v = normal.dot(p);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (anchor) {
    double c = normal.dot(*anchor);
    if (offset_out) *offset_out = c;
    return std::max(hi - c, c - lo);
  }
  if (offset_out) *offset_out = 0.5 * (lo + hi);
  return 0.5 * (hi - lo);
}

template <int N>
Vec<N> perturb_normal(const Vec<N>& n, const Vec<N>& t1, const Vec<N>& t2, double a,
                      double b) {
  Vec<N> v = n + a * t1;
  if constexpr (N == 3) v += b * t2;
  (void)t2;
  (void)b;
  return v.normalized();
}

}  // namespace detail

// Best hyperplane in the sup norm: least-squares seed, then a coarse-to-fine
// rotation search around it. With an anchor the plane is pinned through it.
template <int N>
PlaneFit<N> fit_hyperplane(std::span<const Vec<N>> pts,
                           std::optional<Vec<N>> anchor = std::nullopt) {
  if (pts.size() < N)
    throw GeometryError("fit_hyperplane: need at least d+1 points");

  Vec<N> center = Vec<N>::Zero();
  if (anchor) {
    center = *anchor;
  } else {
    for (const auto& p : pts) center += p;
    center /= double(pts.size());
  }

  Mat<N> cov = Mat<N>::Zero();
  double scale2 = 0.0;
  for (const auto& p : pts) {
    Vec<N> q = p - center;
    cov += q * q.transpose();
    scale2 = std::max(scale2, q.squaredNorm());
  }
  Eigen::SelfAdjointEigenSolver<Mat<N>> es(cov);
  Vec<N> normal = es.eigenvectors().col(0);

  PlaneFit<N> fit;
  // Degenerate when the points span fewer than d dimensions: the two
  // smallest spectral directions both vanish relative to the spread.
  double spread = es.eigenvalues()[N - 1];
  fit.degenerate = spread <= 0.0 || es.eigenvalues()[1] <= 1e-24 * spread;

  // Orthonormal tangent frame around the seed normal.
  Vec<N> t1, t2 = Vec<N>::Zero();
  {
    int k = 0;
    for (int i = 1; i < N; ++i)
      if (std::abs(normal[i]) < std::abs(normal[k])) k = i;
    t1 = (Vec<N>::Unit(k) - normal[k] * normal).normalized();
    if constexpr (N == 3) t2 = normal.cross(t1);
  }

  double best = detail::sup_deviation<N>(pts, normal, anchor, nullptr);
  Vec<N> best_n = normal;
  double step = 0.2;
  for (int round = 0; round < 48 && step > 1e-13; ++round, step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int i = -2; i <= 2; ++i) {
        int jmax = (N == 3) ? 2 : 0;
        for (int j = -jmax; j <= jmax; ++j) {
          if (i == 0 && j == 0) continue;
          Vec<N> cand = detail::perturb_normal<N>(best_n, t1, t2, i * step, j * step);
          double dev = detail::sup_deviation<N>(pts, cand, anchor, nullptr);
          if (dev < best) {
            best = dev;
            best_n = cand;
            improved = true;
          }
        }
      }
      if (improved) {
        // Refresh the tangent frame so the stencil stays well conditioned.
        int k = 0;
        for (int i = 1; i < N; ++i)
          if (std::abs(best_n[i]) < std::abs(best_n[k])) k = i;
        t1 = (Vec<N>::Unit(k) - best_n[k] * best_n).normalized();
        if constexpr (N == 3) t2 = best_n.cross(t1);
      }
    }
  }

  double offset = 0.0;
  fit.residual = detail::sup_deviation<N>(pts, best_n, anchor, &offset);
  fit.plane.normal = best_n;
  fit.plane.anchor = anchor ? *anchor : Vec<N>(offset * best_n);
  if (!anchor) {
    // Place the anchor near the sample centroid, projected onto the plane.
    Vec<N> c = Vec<N>::Zero();
    for (const auto& p : pts) c += p;
    c /= double(pts.size());
    fit.plane.anchor = c - (best_n.dot(c) - offset) * best_n;
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Two-plane proximity certificate.
//
// For d-planes P1, P2 and affinely independent points X = {x_0,...,x_d} with
//   eta = min_i dist(x_i, aff span(X \ {x_i})) / diam X in (0,1),
//   dist(x_i, P_j) < theta * diam X,  theta < eta (d+1)^{-1} / 2,
// every y in P2 satisfies dist(y, P1) <= theta ((2d/eta) dist(y, X) + diam X).
// The checker validates the hypotheses and reports the worst sampled ratio of
// the two sides.
// ---------------------------------------------------------------------------

template <int N> struct ProximityReport {
  bool hypotheses_ok = false;
  std::string violation;  // which hypothesis failed, empty if none
  double eta = 0.0;
  double diam_x = 0.0;
  double worst_ratio = 0.0;      // max over sampled y of dist(y,P1) / bound(y)
  double worst_ratio_far = 0.0;  // same, restricted to dist(y,X) >= diam X
};

template <int N> double simplex_eta(const std::array<Vec<N>, N>& x) {
  double diam = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) diam = std::max(diam, (x[i] - x[j]).norm());
  if (diam <= 0.0) return 0.0;
  double eta = kInf;
  for (int omit = 0; omit < N; ++omit) {
    // Affine hull of the remaining N-1 points.
    std::vector<Vec<N>> rest;
    for (int i = 0; i < N; ++i)
      if (i != omit) rest.push_back(x[i]);
    Vec<N> base = rest[0];
    Eigen::Matrix<double, N, Eigen::Dynamic> dirs(N, int(rest.size()) - 1);
    for (std::size_t k = 1; k < rest.size(); ++k) dirs.col(int(k) - 1) = rest[k] - base;
    Vec<N> v = x[omit] - base;
    if (dirs.cols() > 0) {
      Eigen::VectorXd coef = dirs.colPivHouseholderQr().solve(v);
      v -= dirs * coef;
    }
    eta = std::min(eta, v.norm() / diam);
  }
  return eta;
}

template <int N>
ProximityReport<N> plane_proximity_bound(const Hyperplane<N>& p1, const Hyperplane<N>& p2,
                                         const std::array<Vec<N>, N>& x, double theta,
                                         int n_samples = 1000, double window = 10.0,
                                         std::uint64_t seed = 7) {
  ProximityReport<N> rep;
  rep.diam_x = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) rep.diam_x = std::max(rep.diam_x, (x[i] - x[j]).norm());
  rep.eta = simplex_eta<N>(x);

  // eta = 1 exactly for two-point X (d = 1); accept the closed endpoint.
  if (!(rep.eta > 0.0 && rep.eta <= 1.0)) {
    rep.violation = "(a) eta outside (0,1)";
    return rep;
  }
  if (!(theta < rep.eta / double(N) / 2.0)) {
    rep.violation = "(a) theta >= eta (d+1)^{-1} / 2";
    return rep;
  }
  for (int i = 0; i < N; ++i) {
    if (p1.dist(x[i]) >= theta * rep.diam_x || p2.dist(x[i]) >= theta * rep.diam_x) {
      rep.violation = "(b) dist(x_i, P_j) >= theta diam X at i=" + std::to_string(i);
      return rep;
    }
  }
  rep.hypotheses_ok = true;

  const int d = N - 1;
  // Tangent frame of P2.
  Vec<N> t1, t2 = Vec<N>::Zero();
  {
    Vec<N> n = p2.normal;
    int k = 0;
    for (int i = 1; i < N; ++i)
      if (std::abs(n[i]) < std::abs(n[k])) k = i;
    t1 = (Vec<N>::Unit(k) - n[k] * n).normalized();
    if constexpr (N == 3) t2 = n.cross(t1);
  }
  Philox rng(seed, 0);
  for (int s = 0; s < n_samples; ++s) {
    double a = rng.uniform(-window * rep.diam_x, window * rep.diam_x);
    double b = (N == 3) ? rng.uniform(-window * rep.diam_x, window * rep.diam_x) : 0.0;
    Vec<N> y = p2.anchor + a * t1 + b * t2;
    double dist_x = kInf;
    for (int i = 0; i < N; ++i) dist_x = std::min(dist_x, (y - x[i]).norm());
    double bound = theta * ((2.0 * d / rep.eta) * dist_x + rep.diam_x);
    double lhs = p1.dist(y);
    if (bound > 0.0) {
      double ratio = lhs / bound;
      rep.worst_ratio = std::max(rep.worst_ratio, ratio);
      if (dist_x >= rep.diam_x) rep.worst_ratio_far = std::max(rep.worst_ratio_far, ratio);
    }
  }
  return rep;
}

}  // namespace rflab
