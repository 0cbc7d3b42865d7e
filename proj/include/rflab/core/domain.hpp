#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "rflab/core/mesh.hpp"
#include "rflab/core/types.hpp"

namespace rflab {

// A domain handed to the lab: an inside predicate, a conservative lower
// bound on the distance to the complement, and a boundary carrier that
// supports exact nearest-point queries and covering samples.
template <int N> class DomainRep {
 public:
  virtual ~DomainRep() = default;

  virtual bool inside(const Vec<N>& p) const = 0;
  // Never exceeds dist(p, complement) for p inside.
  virtual double dist_lower(const Vec<N>& p) const = 0;
  // Exact distance to the boundary carrier (mesh and/or sphere surfaces).
  virtual double boundary_distance(const Vec<N>& p) const = 0;
  virtual Vec<N> nearest_boundary(const Vec<N>& p) const = 0;
  virtual std::vector<Vec<N>> boundary_samples(double spacing) const = 0;

  // Covering sample of the boundary restricted to a ball. The default
  // filters the global sample; carriers with structure localize it.
  virtual std::vector<Vec<N>> boundary_samples_in(const Ball<N>& ball, double spacing) const {
    std::vector<Vec<N>> out;
    for (const auto& p : boundary_samples(spacing))
      if (ball.contains(p)) out.push_back(p);
    return out;
  }

  // Exact "does the closed box meet the complement" test when the
  // representation supports one; nullopt means undecided.
  virtual std::optional<bool> complement_in_box(const Box<N>& b) const {
    (void)b;
    return std::nullopt;
  }

  virtual double r0() const { return kInf; }
  virtual double diameter_hint() const = 0;
  virtual const BoundaryMesh<N>* mesh() const { return nullptr; }
};

template <int N>
double distance_to_boundary(const Vec<N>& p, const DomainRep<N>& rep) {
  return rep.boundary_distance(p);
}

// Upper half-space {x_N > level}, truncated to a working box for sampling.
template <int N> class HalfSpaceDomain : public DomainRep<N> {
 public:
  explicit HalfSpaceDomain(double extent = 4.0, double level = 0.0)
      : extent_(extent), level_(level) {}

  bool inside(const Vec<N>& p) const override { return p[N - 1] > level_; }
  double dist_lower(const Vec<N>& p) const override { return std::max(0.0, p[N - 1] - level_); }
  double boundary_distance(const Vec<N>& p) const override { return std::abs(p[N - 1] - level_); }
  Vec<N> nearest_boundary(const Vec<N>& p) const override {
    Vec<N> q = p;
    q[N - 1] = level_;
    return q;
  }
  std::optional<bool> complement_in_box(const Box<N>& b) const override {
    return b.min()[N - 1] <= level_;
  }
  double diameter_hint() const override { return 2.0 * extent_ * std::sqrt(double(N)); }

  std::vector<Vec<N>> boundary_samples_in(const Ball<N>& ball, double spacing) const override {
    std::vector<Vec<N>> pts;
    double h = std::abs(ball.center[N - 1] - level_);
    if (h > ball.radius) return pts;
    double w = std::sqrt(ball.radius * ball.radius - h * h);
    int m = std::max(2, int(std::ceil(2.0 * w / spacing)));
    if constexpr (N == 2) {
      for (int i = 0; i <= m; ++i)
        pts.push_back(Vec<2>(ball.center[0] - w + 2.0 * w * i / m, level_));
    } else {
      for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j) {
          Vec<3> p(ball.center[0] - w + 2.0 * w * i / m,
                   ball.center[1] - w + 2.0 * w * j / m, level_);
          if (ball.contains(p)) pts.push_back(p);
        }
    }
    return pts;
  }

  std::vector<Vec<N>> boundary_samples(double spacing) const override {
    std::vector<Vec<N>> pts;
    int m = std::max(1, int(std::ceil(2.0 * extent_ / spacing)));
    if constexpr (N == 2) {
      for (int i = 0; i <= m; ++i)
        pts.push_back(Vec<2>(-extent_ + 2.0 * extent_ * i / m, level_));
    } else {
      for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j)
          pts.push_back(Vec<3>(-extent_ + 2.0 * extent_ * i / m,
                               -extent_ + 2.0 * extent_ * j / m, level_));
    }
    return pts;
  }

 private:
  double extent_;
  double level_;
};

template <int N> class BallDomain : public DomainRep<N> {
 public:
  explicit BallDomain(Ball<N> b = {Vec<N>::Zero(), 1.0}) : ball_(b) {}

  bool inside(const Vec<N>& p) const override { return (p - ball_.center).norm() < ball_.radius; }
  double dist_lower(const Vec<N>& p) const override {
    return std::max(0.0, ball_.radius - (p - ball_.center).norm());
  }
  double boundary_distance(const Vec<N>& p) const override {
    return std::abs((p - ball_.center).norm() - ball_.radius);
  }
  Vec<N> nearest_boundary(const Vec<N>& p) const override {
    Vec<N> d = p - ball_.center;
    double len = d.norm();
    if (len == 0.0) return ball_.center + Vec<N>::Unit(0) * ball_.radius;
    return ball_.center + (ball_.radius / len) * d;
  }
  std::optional<bool> complement_in_box(const Box<N>& b) const override {
    // The complement meets the box iff the farthest corner is outside.
    double far2 = 0.0;
    for (int i = 0; i < N; ++i) {
      double lo = std::abs(b.min()[i] - ball_.center[i]);
      double hi = std::abs(b.max()[i] - ball_.center[i]);
      double m = std::max(lo, hi);
      far2 += m * m;
    }
    return far2 >= ball_.radius * ball_.radius;
  }
  double diameter_hint() const override { return 2.0 * ball_.radius; }
  const Ball<N>& ball() const { return ball_; }

  std::vector<Vec<N>> boundary_samples_in(const Ball<N>& window, double spacing) const override {
    std::vector<Vec<N>> pts;
    if constexpr (N == 2) {
      double ang = std::atan2(window.center[1] - ball_.center[1],
                              window.center[0] - ball_.center[0]);
      double reach = std::min(M_PI, (window.radius + spacing) / ball_.radius);
      int m = std::max(4, int(std::ceil(2.0 * reach * ball_.radius / spacing)));
      for (int i = 0; i <= m; ++i) {
        double a = ang - reach + 2.0 * reach * i / m;
        Vec<2> p = ball_.center + ball_.radius * Vec<2>(std::cos(a), std::sin(a));
        if (window.contains(p)) pts.push_back(p);
      }
      return pts;
    }
    return DomainRep<N>::boundary_samples_in(window, spacing);
  }

  std::vector<Vec<N>> boundary_samples(double spacing) const override {
    std::vector<Vec<N>> pts;
    if constexpr (N == 2) {
      int m = std::max(8, int(std::ceil(2.0 * M_PI * ball_.radius / spacing)));
      for (int i = 0; i < m; ++i) {
        double a = 2.0 * M_PI * i / m;
        pts.push_back(ball_.center + ball_.radius * Vec<2>(std::cos(a), std::sin(a)));
      }
    } else {
      // Fibonacci sphere with enough points for the requested covering.
      double area = 4.0 * M_PI * ball_.radius * ball_.radius;
      int m = std::max(32, int(std::ceil(4.0 * area / (spacing * spacing))));
      const double ga = M_PI * (3.0 - std::sqrt(5.0));
      for (int i = 0; i < m; ++i) {
        double z = 1.0 - 2.0 * (i + 0.5) / m;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double a = ga * i;
        pts.push_back(ball_.center +
                      ball_.radius * Vec<3>(r * std::cos(a), r * std::sin(a), z));
      }
    }
    return pts;
  }

 private:
  Ball<N> ball_;
};

// Domain carried by a closed oriented boundary mesh; inside/outside comes
// from the pseudonormal sign of the nearest face.
template <int N> class MeshDomain : public DomainRep<N> {
 public:
  explicit MeshDomain(BoundaryMesh<N> mesh, double r0 = kInf)
      : mesh_(std::move(mesh)), r0_(r0) {
    mesh_.build_index();
  }

  bool inside(const Vec<N>& p) const override { return mesh_.inside(p); }
  double dist_lower(const Vec<N>& p) const override { return mesh_.distance(p); }
  double boundary_distance(const Vec<N>& p) const override { return mesh_.distance(p); }
  Vec<N> nearest_boundary(const Vec<N>& p) const override { return mesh_.closest(p).point; }
  std::vector<Vec<N>> boundary_samples(double spacing) const override {
    return mesh_.sample(spacing);
  }
  std::vector<Vec<N>> boundary_samples_in(const Ball<N>& ball, double spacing) const override {
    std::vector<Vec<N>> pts;
    mesh_.for_each_face_in_box(ball.box(), [&](int fi) {
      sample_simplex(mesh_.faces()[fi], spacing, [&](const Vec<N>& p) {
        if (ball.contains(p)) pts.push_back(p);
      });
    });
    return pts;
  }
  std::optional<bool> complement_in_box(const Box<N>& b) const override {
    if (mesh_.any_face_in_box(b)) return true;
    return !mesh_.inside(b.center());
  }
  double r0() const override { return r0_; }
  double diameter_hint() const override { return mesh_.bounds().diagonal().norm(); }
  const BoundaryMesh<N>* mesh() const override { return &mesh_; }

 private:
  BoundaryMesh<N> mesh_;
  double r0_;
};

}  // namespace rflab
