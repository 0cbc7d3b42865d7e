#pragma once

#include <span>
#include <vector>

#include "rflab/core/bvh.hpp"
#include "rflab/core/types.hpp"

namespace rflab {

struct EmptyIntersectionError : GeometryError {
  using GeometryError::GeometryError;
};

// Ball-localized Hausdorff distance between finite samples:
//   max( sup_{a in A∩ball} dist(a, B), sup_{b in B∩ball} dist(b, A) ),
// distances taken against the full opposite sample.
template <int N>
double local_hausdorff(std::span<const Vec<N>> a, std::span<const Vec<N>> b,
                       const Ball<N>& ball) {
  PointIndex<N> ia(std::vector<Vec<N>>(a.begin(), a.end()));
  PointIndex<N> ib(std::vector<Vec<N>>(b.begin(), b.end()));

  auto one_side = [&](std::span<const Vec<N>> from, const PointIndex<N>& to) {
    double sup = -1.0;
    for (const auto& p : from) {
      if (!ball.contains(p)) continue;
      sup = std::max(sup, to.distance(p));
    }
    return sup;
  };

  double da = one_side(a, ib);
  double db = one_side(b, ia);
  if (da < 0.0 || db < 0.0)
    throw EmptyIntersectionError("local_hausdorff: a sample misses the ball");
  return std::max(da, db);
}

// Symmetric sampled Hausdorff distance between two point sets (no ball
// restriction); used for mesh-to-mesh comparisons.
template <int N>
double sampled_hausdorff(std::span<const Vec<N>> a, std::span<const Vec<N>> b) {
  if (a.empty() || b.empty()) throw EmptyIntersectionError("sampled_hausdorff: empty set");
  PointIndex<N> ia(std::vector<Vec<N>>(a.begin(), a.end()));
  PointIndex<N> ib(std::vector<Vec<N>>(b.begin(), b.end()));
  double sup = 0.0;
  for (const auto& p : a) sup = std::max(sup, ib.distance(p));
  for (const auto& p : b) sup = std::max(sup, ia.distance(p));
  return sup;
}

}  // namespace rflab
