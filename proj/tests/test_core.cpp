#include <doctest.h>

#include <rflab/core/bvh.hpp>
#include <rflab/core/domain.hpp>
#include <rflab/core/hausdorff.hpp>
#include <rflab/core/mesh.hpp>
#include <rflab/core/planefit.hpp>
#include <rflab/core/rng.hpp>
#include <rflab/core/simplex.hpp>
#include <rflab/core/types.hpp>

#include <filesystem>

using namespace rflab;

namespace {

// Brute-force nearest-simplex scan, the oracle for the spatial index.
template <int N>
std::pair<int, double> brute_nearest(const Vec<N>& p, const std::vector<Simplex<N>>& faces) {
  int best = -1;
  double best_sq = kInf;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    double d2 = sq_dist_point_simplex(p, faces[i]);
    if (d2 < best_sq) {
      best_sq = d2;
      best = int(i);
    }
  }
  return {best, best_sq};
}

// Brute-force double loop for the localized Hausdorff distance.
template <int N>
double brute_local_hausdorff(const std::vector<Vec<N>>& a, const std::vector<Vec<N>>& b,
                             const Ball<N>& ball) {
  auto side = [&](const std::vector<Vec<N>>& from, const std::vector<Vec<N>>& to) {
    double sup = -1.0;
    for (const auto& p : from) {
      if (!ball.contains(p)) continue;
      double d = kInf;
      for (const auto& q : to) d = std::min(d, (p - q).norm());
      sup = std::max(sup, d);
    }
    return sup;
  };
  return std::max(side(a, b), side(b, a));
}

// Exhaustive rotation-grid search for the sup-norm plane fit (2D).
double brute_minimax_line(const std::vector<Vec<2>>& pts, int grid) {
  double best = kInf;
  for (int i = 0; i < grid; ++i) {
    double a = M_PI * i / grid;
    Vec<2> n(std::cos(a), std::sin(a));
    double lo = kInf, hi = -kInf;
    for (const auto& p : pts) {
      double v = n.dot(p);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    best = std::min(best, 0.5 * (hi - lo));
  }
  return best;
}

BoundaryMesh<2> square_mesh(double half, double zlo, double zhi) {
  // Closed rectangle [-half,half] x [zlo,zhi], outward-oriented.
  BoundaryMesh<2> m;
  Vec<2> a(-half, zlo), b(half, zlo), c(half, zhi), d(-half, zhi);
  m.add_face({a, b}, Vec<2>(0, -1));
  m.add_face({b, c}, Vec<2>(1, 0));
  m.add_face({c, d}, Vec<2>(0, 1));
  m.add_face({d, a}, Vec<2>(-1, 0));
  return m;
}

}  // namespace

TEST_CASE("philox streams are deterministic and distinct") {
  Philox a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 100; ++i) {
    double x = a.next_double();
    CHECK(x == b.next_double());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  // distinct stream decorrelated
  Philox a2(42, 7);
  int same = 0;
  for (int i = 0; i < 64; ++i) same += a2.next_u32() == c.next_u32();
  CHECK(same <= 2);
}

TEST_CASE("philox doubles are roughly uniform") {
  Philox g(1234, 0);
  double mean = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) mean += g.next_double();
  mean /= n;
  CHECK(std::abs(mean - 0.5) < 0.01);
}

TEST_CASE("dyadic cube arithmetic") {
  DyadicCube<2> q{0, IVec<2>(0, 2)};  // [0,1) x [2,3)
  CHECK(q.side() == 1.0);
  CHECK(q.center() == Vec<2>(0.5, 2.5));
  CHECK(q.contains(Vec<2>(0.0, 2.0)));
  CHECK(!q.contains(Vec<2>(1.0, 2.0)));
  auto p = q.parent();
  CHECK(p.level == -1);
  CHECK(p.corner == IVec<2>(0, 1));
  bool found = false;
  for (int i = 0; i < 4; ++i) found = found || (p.child(i) == q);
  CHECK(found);

  // negative corners round toward -inf
  DyadicCube<2> neg{1, IVec<2>(-1, -2)};
  CHECK(neg.parent().corner == IVec<2>(-1, -1));
  CHECK(neg.lo() == Vec<2>(-0.5, -1.0));

  auto d = q.dilated_box(4.0);
  CHECK(d.min() == Vec<2>(-1.5, 0.5));
  CHECK(d.max() == Vec<2>(2.5, 4.5));
}

TEST_CASE("bvh nearest equals exhaustive scan on a random segment soup") {
  Philox rng(9, 0);
  std::vector<Simplex<2>> faces;
  for (int i = 0; i < 500; ++i) {
    Vec<2> a(rng.uniform(-2, 2), rng.uniform(-2, 2));
    Vec<2> b = a + 0.2 * unit_sphere_dir<2>(rng);
    faces.push_back({a, b});
  }
  Bvh<2> tree;
  std::vector<Box<2>> boxes;
  for (const auto& f : faces) boxes.push_back(simplex_box(f));
  tree.build(boxes);
  for (int t = 0; t < 200; ++t) {
    Vec<2> p(rng.uniform(-3, 3), rng.uniform(-3, 3));
    auto [bi, bd] = brute_nearest(p, faces);
    auto [ti, td] = tree.nearest_sq(p, [&](int i) { return sq_dist_point_simplex(p, faces[i]); });
    CHECK(ti >= 0);
    CHECK(std::abs(std::sqrt(td) - std::sqrt(bd)) <= 1e-12);
    (void)bi;
  }
}

TEST_CASE("bvh nearest equals exhaustive scan on random triangles (3d)") {
  Philox rng(11, 0);
  std::vector<Simplex<3>> faces;
  for (int i = 0; i < 300; ++i) {
    Vec<3> a(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    Vec<3> b = a + 0.3 * unit_sphere_dir<3>(rng);
    Vec<3> c = a + 0.3 * unit_sphere_dir<3>(rng);
    faces.push_back({a, b, c});
  }
  Bvh<3> tree;
  std::vector<Box<3>> boxes;
  for (const auto& f : faces) boxes.push_back(simplex_box(f));
  tree.build(boxes);
  for (int t = 0; t < 100; ++t) {
    Vec<3> p(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    auto [bi, bd] = brute_nearest(p, faces);
    auto [ti, td] = tree.nearest_sq(p, [&](int i) { return sq_dist_point_simplex(p, faces[i]); });
    CHECK(ti >= 0);
    CHECK(std::abs(std::sqrt(td) - std::sqrt(bd)) <= 1e-12);
    (void)bi;
  }
}

TEST_CASE("local_hausdorff spec examples") {
  // identical samples -> 0
  std::vector<Vec<2>> seg;
  for (int i = 0; i < 100; ++i) seg.push_back(Vec<2>(-0.5 + i / 99.0, 0.0));
  Ball<2> ball{Vec<2>::Zero(), 1.0};
  CHECK(local_hausdorff<2>(seg, seg, ball) == 0.0);

  // parallel translate by h -> h
  double h = 0.25;
  std::vector<Vec<2>> shifted;
  for (const auto& p : seg) shifted.push_back(p + Vec<2>(0, h));
  CHECK(local_hausdorff<2>(seg, shifted, ball) == doctest::Approx(h).epsilon(1e-12));

  // random 50-point sets: equals the brute-force double loop exactly
  Philox rng(5, 0);
  std::vector<Vec<2>> a, b;
  for (int i = 0; i < 50; ++i) {
    a.push_back(0.9 * unit_sphere_dir<2>(rng) * rng.next_double());
    b.push_back(0.9 * unit_sphere_dir<2>(rng) * rng.next_double());
  }
  CHECK(local_hausdorff<2>(a, b, ball) == brute_local_hausdorff(a, b, ball));
}

TEST_CASE("local_hausdorff errors on empty intersection") {
  std::vector<Vec<2>> a{Vec<2>(5, 5)}, b{Vec<2>(0, 0)};
  Ball<2> ball{Vec<2>::Zero(), 1.0};
  CHECK_THROWS_AS(local_hausdorff<2>(a, b, ball), EmptyIntersectionError);
}

TEST_CASE("local_hausdorff symmetry and perturbation stability") {
  Philox rng(17, 0);
  Ball<2> ball{Vec<2>::Zero(), 1.0};
  std::vector<Vec<2>> a, b;
  for (int i = 0; i < 40; ++i) {
    a.push_back(0.8 * unit_sphere_dir<2>(rng) * rng.next_double());
    b.push_back(0.8 * unit_sphere_dir<2>(rng) * rng.next_double());
  }
  double d1 = local_hausdorff<2>(a, b, ball);
  double d2 = local_hausdorff<2>(b, a, ball);
  CHECK(d1 == d2);

  // 1-Lipschitz under uniform perturbation of one sample
  double eps = 1e-3;
  std::vector<Vec<2>> a2 = a;
  for (auto& p : a2) p += eps * unit_sphere_dir<2>(rng);
  double d3 = local_hausdorff<2>(a2, b, ball);
  CHECK(std::abs(d3 - d1) <= eps + 1e-12);
}

TEST_CASE("fit_hyperplane spec examples") {
  // coplanar points -> exact plane, zero residual
  std::vector<Vec<3>> pts;
  Philox rng(3, 0);
  for (int i = 0; i < 40; ++i)
    pts.push_back(Vec<3>(rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0));
  auto fit = fit_hyperplane<3>(pts);
  CHECK(fit.residual <= 1e-12);
  CHECK(std::abs(std::abs(fit.plane.normal[2]) - 1.0) <= 1e-9);
  CHECK(!fit.degenerate);

  // offset plane with anchor forced through the origin
  std::vector<Vec<3>> off;
  for (const auto& p : pts) off.push_back(p + Vec<3>(0, 0, 0.1));
  auto fit2 = fit_hyperplane<3>(off, Vec<3>(0, 0, 0));
  CHECK(fit2.residual == doctest::Approx(0.1).epsilon(1e-6));

  // perturbed coplanar points: matches exhaustive rotation search within step
  std::vector<Vec<2>> noisy;
  Philox rng2(4, 0);
  for (int i = 0; i < 30; ++i)
    noisy.push_back(Vec<2>(rng2.uniform(-1, 1), 0.02 * rng2.uniform(-1, 1)));
  auto fit3 = fit_hyperplane<2>(noisy);
  int grid = 4096;
  double oracle = brute_minimax_line(noisy, grid);
  CHECK(fit3.residual <= oracle + 1e-9);
  CHECK(fit3.residual >= oracle - (M_PI / grid) * 2.0);
}

TEST_CASE("fit_hyperplane degenerate input flagged") {
  std::vector<Vec<3>> line;
  for (int i = 0; i < 10; ++i) line.push_back(Vec<3>(i * 0.1, 0, 0));
  auto fit = fit_hyperplane<3>(line);
  CHECK(fit.degenerate);
  CHECK(fit.residual <= 1e-12);
}

TEST_CASE("fit residual is invariant under rigid motions") {
  Philox rng(21, 0);
  std::vector<Vec<3>> pts;
  for (int i = 0; i < 25; ++i)
    pts.push_back(Vec<3>(rng.uniform(-1, 1), rng.uniform(-1, 1), 0.05 * rng.uniform(-1, 1)));
  auto base = fit_hyperplane<3>(pts);
  Mat<3> rot = random_rotation<3>(rng);
  Vec<3> shift(0.3, -1.2, 0.7);
  std::vector<Vec<3>> moved;
  for (const auto& p : pts) moved.push_back(rot * p + shift);
  auto fit = fit_hyperplane<3>(moved);
  CHECK(fit.residual == doctest::Approx(base.residual).epsilon(1e-9));
}

TEST_CASE("plane proximity bound: identical planes") {
  Hyperplane<2> p{Vec<2>(0, 0), Vec<2>(0, 1)};
  std::array<Vec<2>, 2> x{Vec<2>(0, 0), Vec<2>(1, 0)};
  auto rep = plane_proximity_bound<2>(p, p, x, 0.1);
  CHECK(rep.hypotheses_ok);
  CHECK(rep.worst_ratio == 0.0);
}

TEST_CASE("plane proximity bound: parallel offset planes") {
  // Direct evaluation of both sides. With X midway between parallel planes
  // at distance h, the bound near X carries only the theta*diamX term, so
  // lhs/bound can reach up to 2 there; away from X (dist(y,X) >= diam X) the
  // inequality holds outright.
  double h = 0.02;
  Hyperplane<2> p1{Vec<2>(0, 0), Vec<2>(0, 1)};
  Hyperplane<2> p2{Vec<2>(0, h), Vec<2>(0, 1)};
  std::array<Vec<2>, 2> x{Vec<2>(0, h / 2), Vec<2>(1, h / 2)};
  double diam = 1.0;
  double theta = h / (2 * diam) * 1.5;  // strictly above the witness distances
  auto rep = plane_proximity_bound<2>(p1, p2, x, theta);
  CHECK(rep.hypotheses_ok);
  CHECK(rep.eta == doctest::Approx(1.0));
  CHECK(rep.worst_ratio <= 2.0);
  CHECK(rep.worst_ratio_far <= 1.0);
}

TEST_CASE("plane proximity bound: random near-coincident planes stay under the bound") {
  Philox rng(33, 0);
  for (int rep_i = 0; rep_i < 10; ++rep_i) {
    double tilt = 1e-3 * rng.next_double();
    Hyperplane<3> p1{Vec<3>(0, 0, 0), Vec<3>(0, 0, 1)};
    Hyperplane<3> p2{Vec<3>(0, 0, tilt), Vec<3>(std::sin(tilt), 0, std::cos(tilt))};
    std::array<Vec<3>, 3> x{Vec<3>(0, 0, 0), Vec<3>(1, 0, 0), Vec<3>(0, 1, 0)};
    auto rep = plane_proximity_bound<3>(p1, p2, x, 0.05, 1000);
    CHECK(rep.hypotheses_ok);
    CHECK(rep.worst_ratio <= 1.0);
  }
}

TEST_CASE("eta of the scaled standard simplex is a dimension constant") {
  // {0, e1} in R^2 and {0, e1, e2} in R^3, plus rigid motions of either.
  std::array<Vec<2>, 2> x2{Vec<2>(0, 0), Vec<2>(1, 0)};
  CHECK(simplex_eta<2>(x2) == doctest::Approx(1.0).epsilon(1e-12));
  std::array<Vec<3>, 3> x3{Vec<3>(0, 0, 0), Vec<3>(1, 0, 0), Vec<3>(0, 1, 0)};
  CHECK(simplex_eta<3>(x3) == doctest::Approx(0.5).epsilon(1e-12));

  Philox rng(51, 0);
  Mat<3> rot = random_rotation<3>(rng);
  Vec<3> t(0.2, -0.4, 1.0);
  double s = 3.7;
  std::array<Vec<3>, 3> moved;
  for (int i = 0; i < 3; ++i) moved[i] = rot * (s * x3[i]) + t;
  CHECK(simplex_eta<3>(moved) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("mesh distance matches exhaustive scan and inside test is consistent") {
  auto mesh = square_mesh(1.0, -1.0, 1.0);  // [-1,1]^2 box boundary
  mesh.build_index();
  Philox rng(8, 0);
  for (int i = 0; i < 1000; ++i) {
    Vec<2> p(rng.uniform(-2, 2), rng.uniform(-2, 2));
    auto [bi, bd] = brute_nearest(p, mesh.faces());
    CHECK(std::abs(mesh.distance(p) - std::sqrt(bd)) <= 1e-12);
    bool in = std::abs(p[0]) < 1.0 && std::abs(p[1]) < 1.0;
    if (std::min({std::abs(std::abs(p[0]) - 1.0), std::abs(std::abs(p[1]) - 1.0)}) > 1e-9)
      CHECK(mesh.inside(p) == in);
    (void)bi;
  }
}

TEST_CASE("half-space and ball domains: spec distance examples") {
  HalfSpaceDomain<3> hs;
  Vec<3> p(0, 0, 3);
  CHECK(distance_to_boundary(p, hs) == 3.0);
  CHECK(hs.inside(p));
  CHECK(hs.dist_lower(p) == 3.0);

  BallDomain<2> disk;
  CHECK(distance_to_boundary<2>(Vec<2>(0, 0), disk) == 1.0);
  CHECK(disk.nearest_boundary(Vec<2>(0.5, 0)) == Vec<2>(1, 0));
}

TEST_CASE("mesh domain dist_lower is a true lower bound (sampled)") {
  auto mesh = square_mesh(1.0, -1.0, 1.0);
  MeshDomain<2> dom(std::move(mesh));
  Philox rng(13, 0);
  for (int i = 0; i < 500; ++i) {
    Vec<2> p(rng.uniform(-0.99, 0.99), rng.uniform(-0.99, 0.99));
    double exact = std::min({1.0 - std::abs(p[0]), 1.0 - std::abs(p[1])});
    CHECK(dom.dist_lower(p) <= exact + 1e-12);
    CHECK(dom.dist_lower(p) == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("off round trip preserves the mesh bytes-for-geometry") {
  auto mesh = square_mesh(0.5, 0.0, 1.0);
  auto path = std::filesystem::temp_directory_path() / "rflab_core_off_test.off";
  mesh.write_off(path.string());
  auto back = BoundaryMesh<2>::read_off(path.string());
  REQUIRE(back.size() == mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i)
    for (int k = 0; k < 2; ++k) CHECK(back.faces()[i][k] == mesh.faces()[i][k]);
  std::filesystem::remove(path);
}

TEST_CASE("unit sphere directions are unit and cover both hemispheres") {
  Philox rng(101, 0);
  int pos = 0;
  for (int i = 0; i < 1000; ++i) {
    auto v = unit_sphere_dir<3>(rng);
    CHECK(std::abs(v.norm() - 1.0) < 1e-12);
    pos += v[2] > 0;
  }
  CHECK(pos > 400);
  CHECK(pos < 600);
}
