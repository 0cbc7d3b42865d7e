#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "rflab/core/types.hpp"

// Dyadic box-counting estimates of H^d and box dimension from a covering
// point sample.
namespace rflab {

struct ResolutionError : GeometryError {
  using GeometryError::GeometryError;
};

struct BoxCount {
  std::vector<double> scales;        // descending dyadic box sides
  std::vector<std::int64_t> counts;  // N(delta)
  std::vector<double> hd_estimates;  // N(delta) * delta^d
  double dim_fit = 0.0;              // slope of log N against log(1/delta)
};

template <int N>
BoxCount box_count(const std::vector<Vec<N>>& sample, double covering_radius,
                   const std::vector<int>& dyadic_levels, int hausdorff_dim = N - 1) {
  if (sample.empty()) throw GeometryError("box_count: empty sample");
  BoxCount out;
  std::vector<int> levels = dyadic_levels;
  std::sort(levels.begin(), levels.end());
  for (int lvl : levels) {
    double delta = std::ldexp(1.0, -lvl);
    if (!(covering_radius < delta / 4.0))
      throw ResolutionError("box_count: covering radius too coarse for delta=" +
                            std::to_string(delta));
    std::vector<std::array<std::int64_t, N>> keys;
    keys.reserve(sample.size());
    for (const auto& p : sample) {
      std::array<std::int64_t, N> k;
      for (int i = 0; i < N; ++i) k[i] = std::int64_t(std::floor(p[i] / delta));
      keys.push_back(k);
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    out.scales.push_back(delta);
    out.counts.push_back(std::int64_t(keys.size()));
    out.hd_estimates.push_back(double(keys.size()) * std::pow(delta, hausdorff_dim));
  }
  // least squares of log N on log(1/delta)
  std::size_t m = out.scales.size();
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    xbar += std::log(1.0 / out.scales[i]);
    ybar += std::log(double(out.counts[i]));
  }
  xbar /= double(m);
  ybar /= double(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double dx = std::log(1.0 / out.scales[i]) - xbar;
    sxx += dx * dx;
    sxy += dx * (std::log(double(out.counts[i])) - ybar);
  }
  out.dim_fit = m > 1 ? sxy / sxx : 0.0;
  return out;
}

// Classical Koch curve (middle-third, outward equilateral bumps) between two
// points; the standard self-similar fixture with dimension log4/log3.
inline void koch_segments(const Vec<2>& a, const Vec<2>& b, int depth,
                          std::vector<std::pair<Vec<2>, Vec<2>>>& out) {
  if (depth == 0) {
    out.emplace_back(a, b);
    return;
  }
  Vec<2> v = (b - a) / 3.0;
  Vec<2> p1 = a + v;
  Vec<2> p3 = a + 2.0 * v;
  Vec<2> p2 = p1 + Eigen::Rotation2D<double>(M_PI / 3.0).toRotationMatrix() * v;
  koch_segments(a, p1, depth - 1, out);
  koch_segments(p1, p2, depth - 1, out);
  koch_segments(p2, p3, depth - 1, out);
  koch_segments(p3, b, depth - 1, out);
}

inline std::vector<Vec<2>> koch_sample(int depth, double spacing) {
  std::vector<std::pair<Vec<2>, Vec<2>>> segs;
  koch_segments(Vec<2>(0, 0), Vec<2>(1, 0), depth, segs);
  std::vector<Vec<2>> pts;
  for (const auto& [a, b] : segs) {
    double len = (b - a).norm();
    int m = std::max(1, int(std::ceil(len / spacing)));
    for (int i = 0; i <= m; ++i) pts.push_back(a + (double(i) / m) * (b - a));
  }
  return pts;
}

}  // namespace rflab
