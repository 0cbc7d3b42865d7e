#include <doctest.h>

#include <rflab/enlarge/enlarge.hpp>
#include <rflab/snowflake/snowflake.hpp>

using namespace rflab;

namespace {

std::shared_ptr<EnlargedDomain<2>> half_plane_enlargement(double eps, int max_level = 18) {
  auto base = std::make_shared<HalfSpaceDomain<2>>();
  std::vector<Vec<2>> e{Vec<2>(0, 0)};
  EnlargeOptions<2> opt;
  opt.family.roots = centered_roots<2>(-2);  // [-4,4)^2
  opt.family.max_level = max_level;
  opt.certify.r_max = 1.0;
  opt.certify_probes = 16;
  return enlarge<2>(base, e, eps, opt);
}

}  // namespace

TEST_CASE("enlarged half-plane: balls on the boundary, union monotone, E on the boundary") {
  double eps = 0.05;
  auto dom = half_plane_enlargement(eps);
  const auto& fam = dom->family();
  REQUIRE(fam.entries.size() > 50);

  // balls centered on y=0 with radii eps |z|
  for (const auto& e : fam.entries) {
    CHECK(std::abs(e.z[1]) <= 1e-12);
    CHECK(e.r == doctest::Approx(eps * e.z.norm()).epsilon(1e-12));
  }

  // monotonicity: Omega subset Omega_eps^+
  Philox rng(7, 0);
  for (int i = 0; i < 500; ++i) {
    Vec<2> p(rng.uniform(-3, 3), rng.uniform(0.001, 3));
    CHECK(dom->inside(p));
    CHECK(dom->dist_lower(p) >= dom->base().dist_lower(p));
  }

  // 20 B_Q cap E = empty: r_Q = eps dist and eps <= 1/20, tangent exactly at
  // eps = 1/20 (the double 0.05 sits one ulp above it)
  for (const auto& e : fam.entries) CHECK(20.0 * e.r <= e.z.norm() * (1.0 + 1e-12));

  // boundary cloud converges to E: samples approach the origin
  auto cloud = dom->boundary_samples_in(Ball<2>{Vec<2>(0, 0), 0.1}, 1e-3);
  REQUIRE(!cloud.empty());
  double nearest = kInf;
  for (const auto& q : cloud) nearest = std::min(nearest, q.norm());
  CHECK(nearest <= 0.02);

  // cloud points: not interior to any ball, not interior to the base
  for (const auto& q : cloud) {
    CHECK(!dom->base().inside(q));
    bool strict_in = false;
    dom->for_each_ball_overlapping(Box<2>(q, q), [&](int i) {
      const auto& e = fam.entries[i];
      if ((q - e.z).norm() < e.r * (1.0 - 1e-9)) strict_in = true;
    });
    CHECK(!strict_in);
  }

  // E membership through exterior access: x + (3/4) r N stays outside
  for (int k = 2; k <= 10; ++k) {
    double r = std::ldexp(1.0, -k);
    CHECK(!dom->inside(Vec<2>(0, -0.75 * r)));  // N = -e_y for the half-plane
  }
}

TEST_CASE("boundary band (2.10): cloud heights near r_Q inside 20B_Q") {
  // probe well inside the resolved zone (truncation near E leaves raw base
  // boundary below the finest family scale)
  double eps = 0.04;
  auto dom = half_plane_enlargement(eps);
  const auto& fam = dom->family();
  std::size_t best_i = 0;
  double best = kInf;
  for (std::size_t i = 0; i < fam.entries.size(); ++i) {
    double d = (fam.entries[i].z - Vec<2>(1.0, 0)).norm();
    if (d < best) { best = d; best_i = i; }
  }
  const auto& q = fam.entries[best_i];
  auto cloud = dom->boundary_samples_in(Ball<2>{q.z, 5.0 * q.r}, q.r / 64.0);
  REQUIRE(cloud.size() > 10);
  // heights run along the outward normal of the upper half-plane (-e_y)
  double c2_meas = 0.0;
  for (const auto& p : cloud) {
    if ((p - q.z).norm() > 5.0 * q.r) continue;
    c2_meas = std::max(c2_meas, std::abs(-p[1] - q.r) / (eps * q.r));
  }
  CHECK(c2_meas > 0.0);
  CHECK(c2_meas <= 10.0);  // the 1-Lipschitz drift gives ~5 in a 5 r_Q window
}

TEST_CASE("(2.6): cloud points away from E lie on some sphere") {
  auto dom = half_plane_enlargement(0.05);
  auto cloud = dom->boundary_samples_in(Ball<2>{Vec<2>(1.0, 0.05), 0.2}, 2e-3);
  REQUIRE(!cloud.empty());
  for (const auto& p : cloud) {
    double best = kInf;
    dom->for_each_ball_overlapping(Ball<2>{p, 1e-6}.box(), [&](int i) {
      const auto& e = dom->family().entries[i];
      best = std::min(best, std::abs((p - e.z).norm() - e.r));
    });
    CHECK(best <= 1e-9);
  }
}

TEST_CASE("neighbor_family: certificates and the 1-Lipschitz radius law") {
  double eps = 0.04;
  auto dom = half_plane_enlargement(eps);
  const auto& fam = dom->family();
  int qi = int(fam.entries.size() / 2);
  auto rep = neighbor_family<2>(*dom, qi);
  CHECK(rep.indices.size() >= 3);
  CHECK(rep.max_center_dist_over_rq <= 30.0);
  // 1-Lipschitz law pairwise against Q
  const auto& q = fam.entries[qi];
  for (int i : rep.indices) {
    const auto& p = fam.entries[i];
    CHECK(std::abs(p.r - q.r) <= eps * (p.z - q.z).norm() + 1e-12);
  }
  // c1 measured stays moderate
  CHECK(rep.c1_measured <= 30.0);

  // isolated ball: the family is a singleton
  auto base = std::make_shared<HalfSpaceDomain<2>>();
  BallFamily<2> one;
  one.epsilon = eps;
  one.entries.push_back({DyadicCube<2>{4, IVec<2>(0, 0)}, Vec<2>(0.5, 0), 0.01});
  EnlargedDomain<2> single(base, one, {}, eps, 0.0, 0.125);
  auto rep1 = neighbor_family<2>(single, 0);
  CHECK(rep1.indices == std::vector<int>{0});
}

TEST_CASE("neighbor count is stable under eps halving") {
  auto count_for = [&](double eps) {
    auto dom = half_plane_enlargement(eps, 20);
    const auto& fam = dom->family();
    // pick the entry nearest a fixed site
    int qi = 0;
    double best = kInf;
    for (std::size_t i = 0; i < fam.entries.size(); ++i) {
      double d = (fam.entries[i].z - Vec<2>(1.0, 0)).norm();
      if (d < best) {
        best = d;
        qi = int(i);
      }
    }
    return double(neighbor_family<2>(*dom, qi).indices.size());
  };
  double n1 = count_for(0.04);
  double n2 = count_for(0.02);
  CHECK(n1 > 2);
  CHECK(n2 > 2);
  CHECK(n2 / n1 < 4.0);  // finite and not exploding under refinement
}

TEST_CASE("graph_function formula values (single centered ball)") {
  double eps = 0.04;
  auto base = std::make_shared<HalfSpaceDomain<2>>();
  BallFamily<2> one;
  one.epsilon = eps;
  one.entries.push_back({DyadicCube<2>{4, IVec<2>(0, 0)}, Vec<2>(0.5, 0), 0.02});
  auto dom = std::make_shared<EnlargedDomain<2>>(base, one, std::vector<Vec<2>>{}, eps, 0.0,
                                                 0.125);
  PatchOptions<2> popt;
  auto patch = build_patch<2>(*dom, 0, popt);

  // f(z~_Q) = r_Q
  Vec<1> origin;
  origin[0] = 0.0;
  auto ev0 = patch.eval(patch.to_frame(Vec<2>(0.5, 0)));
  CHECK(ev0.height == doctest::Approx(0.02).epsilon(1e-12));

  // at in-plane distance r_Q the sphere meets the floor
  Vec<1> off = patch.to_frame(Vec<2>(0.5 + 0.02, 0));
  auto ev1 = patch.eval(off);
  CHECK(ev1.height == doctest::Approx(patch.floor_value()).epsilon(1e-12));

  // finite-difference gradient matches the closed form on the cap
  Vec<1> mid = patch.to_frame(Vec<2>(0.5 + 0.01, 0));
  double h = 1e-7 * 0.02;
  Vec<1> mid_p = mid, mid_m = mid;
  mid_p[0] += h;
  mid_m[0] -= h;
  double fd = (patch.eval(mid_p).height - patch.eval(mid_m).height) / (2 * h);
  CHECK(std::abs(std::abs(fd) - patch.grad_norm(mid)) <= 1e-4);
}

TEST_CASE("verify_lemma23: single-ball patch with the floor at the base plane") {
  // With c2 = 1/eps the floor sits exactly on the base boundary and the
  // formula graph equals the true union boundary: closed-form sphere
  // geometry makes all four checks pass.
  double eps = 0.04;
  auto base = std::make_shared<HalfSpaceDomain<2>>();
  BallFamily<2> one;
  one.epsilon = eps;
  one.entries.push_back({DyadicCube<2>{4, IVec<2>(0, 0)}, Vec<2>(0.5, 0), 0.02});
  auto dom = std::make_shared<EnlargedDomain<2>>(base, one, std::vector<Vec<2>>{}, eps, 0.0,
                                                 0.125);
  PatchOptions<2> popt;
  popt.c2 = 1.0 / eps;
  auto patch = build_patch<2>(*dom, 0, popt);
  CHECK(patch.floor_value() == doctest::Approx(0.0).epsilon(1e-12));
  auto rep = verify_lemma23<2>(*dom, patch, 256);
  CHECK(rep.graph_side_failures == 0);
  CHECK(rep.band_violations == 0);
  CHECK(rep.graph_boundary_failures == 0);
  // Lipschitz estimate finite; the cap contributes the steep part
  CHECK(rep.lip_measured > 0.0);
}

TEST_CASE("verify_lemma23 on the dense half-plane family: bands, sides, Lipschitz") {
  double eps = 0.04;
  auto dom = half_plane_enlargement(eps);
  const auto& fam = dom->family();
  int qi = 0;
  double best = kInf;
  for (std::size_t i = 0; i < fam.entries.size(); ++i) {
    double d = (fam.entries[i].z - Vec<2>(1.0, 0)).norm();
    if (d < best) {
      best = d;
      qi = int(i);
    }
  }
  auto patch = build_patch<2>(*dom, qi);
  auto rep = verify_lemma23<2>(*dom, patch, 512);
  CHECK(rep.band_violations == 0);
  CHECK(rep.graph_side_failures == 0);
  CHECK(rep.graph_boundary_failures == 0);
  // the 1-Lipschitz radius law drifts the heights by 10 eps r_Q across the
  // 10B_Q patch, so the measured band constant tracks 10
  CHECK(rep.c2_measured >= 8.0);
  CHECK(rep.c2_measured <= 12.0);
  CHECK(rep.lip_measured <= 10.0 * std::sqrt(eps));
}

TEST_CASE("flat base: flatness precondition accepts, rough base rejects") {
  // theta large: the snowflake is too rough for delta_cap = eps^2
  SnowflakeConfig<2> cfg;
  cfg.theta = 0.1;
  cfg.b = 0.05;
  cfg.freq = 4;
  cfg.depth = 2;
  cfg.bounded = false;
  cfg.subdiv = {1, 1.0};
  auto gens = build_snowflake<2>(cfg);
  auto rough = std::make_shared<MeshDomain<2>>(gens.back().boundary());

  EnlargeOptions<2> opt;
  opt.family.roots = centered_roots<2>(-2);
  opt.certify.r_max = 0.25;
  opt.certify.fail_fast = false;
  opt.certify.restrict_region = true;
  opt.certify.probe_region = Box<2>(Vec<2>(-2, -0.5), Vec<2>(2, 0.5));
  std::vector<Vec<2>> e{Vec<2>(0.3, 0)};
  CHECK_THROWS_AS(enlarge<2>(std::static_pointer_cast<const DomainRep<2>>(rough), e, 0.01, opt),
                  FlatnessPreconditionError);
}
