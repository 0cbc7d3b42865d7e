#pragma once

#include <vector>

#include "rflab/core/types.hpp"

// Piecewise-linear blip profiles. The master bump is psi(x') = phi(freq *
// x') / freq for a profile phi supported in the half-unit ball with slope at
// most theta. In the plane phi is an arbitrary polyline; in space it is a
// radial profile in the l1 norm (graph faces stay planar that way), with the
// tent phi(x') = (theta/sqrt(d)) max(0, 1/2 - |x'|_1) as the default.
namespace rflab {

enum class ProfileKind { tent, custom };

struct SlopeViolationError : GeometryError {
  using GeometryError::GeometryError;
};

struct ProfileSpec {
  ProfileKind kind = ProfileKind::tent;
  double theta = 0.1;
  int freq = 1;  // the scaling frequency; 0 lets the builder search for one
  // custom d=1: breakpoints (x, phi(x)), zero at both ends, |x| <= 1/2
  std::vector<Vec<2>> poly;
  // custom d=2: (t, g(t)) with phi(x') = g(|x'|_1), g(t_last) = 0, t_last <= 1/2
  std::vector<Vec<2>> radial;
};

// The scaled bump psi for one ambient dimension.
template <int N> struct ScaledProfile {
  double theta = 0.0;
  int freq = 1;
  double support_radius = 0.0;  // psi vanishes outside this l1/abs radius
  double max_height = 0.0;
  double max_slope = 0.0;  // measured Euclidean gradient bound
  // N == 2: breakpoints of psi on [-1/2, 1/2] including both endpoints.
  std::vector<Vec<2>> breaks;
  // N == 3: radial knots (rho_k, h_k) from the center outward; the graph is
  // h(|x'|_1) inside the support diamond and 0 outside.
  std::vector<Vec<2>> radial;

  double eval(const Vec<N - 1>& x) const {
    if constexpr (N == 2) {
      double t = x[0];
      for (std::size_t i = 1; i < breaks.size(); ++i) {
        if (t <= breaks[i][0]) {
          double w = breaks[i][0] - breaks[i - 1][0];
          double s = w > 0 ? (t - breaks[i - 1][0]) / w : 0.0;
          return breaks[i - 1][1] + s * (breaks[i][1] - breaks[i - 1][1]);
        }
      }
      return 0.0;
    } else {
      double t = std::abs(x[0]) + std::abs(x[1]);
      if (t >= support_radius) return 0.0;
      for (std::size_t i = 1; i < radial.size(); ++i) {
        if (t <= radial[i][0]) {
          double w = radial[i][0] - radial[i - 1][0];
          double s = w > 0 ? (t - radial[i - 1][0]) / w : 0.0;
          return radial[i - 1][1] + s * (radial[i][1] - radial[i - 1][1]);
        }
      }
      return 0.0;
    }
  }
};

template <int N> ScaledProfile<N> make_profile(const ProfileSpec& spec, int freq) {
  if (!(spec.theta >= 0.0 && spec.theta < 1.0))
    throw GeometryError("make_profile: theta must lie in [0,1)");
  if (freq < 1) throw GeometryError("make_profile: frequency must be >= 1");
  const int d = N - 1;

  ScaledProfile<N> out;
  out.theta = spec.theta;
  out.freq = freq;

  if constexpr (N == 2) {
    std::vector<Vec<2>> phi;
    if (spec.kind == ProfileKind::tent) {
      phi = {Vec<2>(-0.5, 0.0), Vec<2>(0.0, 0.5 * spec.theta), Vec<2>(0.5, 0.0)};
    } else {
      phi = spec.poly;
      if (phi.size() < 2) throw GeometryError("make_profile: need >= 2 breakpoints");
      for (std::size_t i = 1; i < phi.size(); ++i)
        if (!(phi[i][0] > phi[i - 1][0]))
          throw GeometryError("make_profile: breakpoints must be increasing");
      if (phi.front()[1] != 0.0 || phi.back()[1] != 0.0 ||
          phi.front()[0] < -0.5 || phi.back()[0] > 0.5)
        throw GeometryError("make_profile: support must lie in [-1/2, 1/2] with zero ends");
      for (std::size_t i = 1; i < phi.size(); ++i) {
        double slope = std::abs((phi[i][1] - phi[i - 1][1]) / (phi[i][0] - phi[i - 1][0]));
        if (slope > spec.theta * (1.0 + 1e-12))
          throw SlopeViolationError("make_profile: custom profile exceeds theta");
      }
    }
    // scale: psi(x) = phi(freq x)/freq, then pad flat pieces out to +-1/2
    out.breaks.push_back(Vec<2>(-0.5, 0.0));
    for (const auto& p : phi) {
      Vec<2> q(p[0] / freq, p[1] / freq);
      if (out.breaks.empty() || (q - out.breaks.back()).norm() > 0)
        out.breaks.push_back(q);
    }
    if (out.breaks.back()[0] < 0.5) out.breaks.push_back(Vec<2>(0.5, 0.0));
    for (const auto& p : out.breaks) out.max_height = std::max(out.max_height, std::abs(p[1]));
    out.support_radius = std::max(std::abs(phi.front()[0]), std::abs(phi.back()[0])) / freq;
    for (std::size_t i = 1; i < out.breaks.size(); ++i) {
      double dx = out.breaks[i][0] - out.breaks[i - 1][0];
      if (dx > 0)
        out.max_slope =
            std::max(out.max_slope, std::abs((out.breaks[i][1] - out.breaks[i - 1][1]) / dx));
    }
  } else {
    std::vector<Vec<2>> g;
    if (spec.kind == ProfileKind::tent) {
      g = {Vec<2>(0.0, spec.theta / std::sqrt(double(d)) * 0.5), Vec<2>(0.5, 0.0)};
    } else {
      g = spec.radial;
      if (g.size() < 2) throw GeometryError("make_profile: need >= 2 radial knots");
      if (g.front()[0] != 0.0 || g.back()[1] != 0.0 || g.back()[0] > 0.5)
        throw GeometryError("make_profile: radial profile must start at 0 and end at zero height");
      for (std::size_t i = 1; i < g.size(); ++i) {
        if (!(g[i][0] > g[i - 1][0]))
          throw GeometryError("make_profile: radial knots must be increasing");
        double slope =
            std::abs((g[i][1] - g[i - 1][1]) / (g[i][0] - g[i - 1][0])) * std::sqrt(double(d));
        if (slope > spec.theta * (1.0 + 1e-12))
          throw SlopeViolationError("make_profile: custom profile exceeds theta");
      }
    }
    for (const auto& p : g) {
      out.radial.push_back(Vec<2>(p[0] / freq, p[1] / freq));
      out.max_height = std::max(out.max_height, std::abs(p[1]) / freq);
    }
    out.support_radius = g.back()[0] / freq;
    for (std::size_t i = 1; i < g.size(); ++i)
      out.max_slope = std::max(
          out.max_slope,
          std::abs((g[i][1] - g[i - 1][1]) / (g[i][0] - g[i - 1][0])) * std::sqrt(double(d)));
  }
  return out;
}

}  // namespace rflab
