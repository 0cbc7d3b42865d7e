#include <doctest.h>

#include <rflab/core/rng.hpp>
#include <rflab/flatness/flatness.hpp>
#include <rflab/snowflake/snowflake.hpp>

using namespace rflab;

TEST_CASE("half-space: delta zero, separation holds, normal points out") {
  HalfSpaceDomain<2> dom;
  auto rep = measure_flatness<2>(dom, Vec<2>(0.3, 0), 0.5);
  CHECK(rep.delta <= 1e-9);
  CHECK(rep.separation_ok);
  CHECK((rep.normal - Vec<2>(0, -1)).norm() <= 1e-6);

  HalfSpaceDomain<3> dom3;
  auto rep3 = measure_flatness<3>(dom3, Vec<3>(0, 0.2, 0), 0.4);
  CHECK(rep3.delta <= 1e-9);
  CHECK(rep3.separation_ok);
  CHECK((rep3.normal - Vec<3>(0, 0, -1)).norm() <= 1e-6);
}

TEST_CASE("unit disk at r = 0.2: tangent-line sagitta bound") {
  BallDomain<2> disk;
  auto rep = measure_flatness<2>(disk, Vec<2>(1, 0), 0.2);
  // the sagitta oracle: max deviation of the arc from the tangent is
  // 2 sin^2(phi/2) with 2 sin(phi/2) = r, i.e. r^2/2; delta <= r/2 + slack
  CHECK(rep.delta <= 0.105);
  CHECK(rep.delta >= 0.02);  // a circle is not a line at this scale
  CHECK(rep.separation_ok);
  // normal points away from the disk
  CHECK(rep.normal.dot(Vec<2>(1, 0)) > 0.9);
}

TEST_CASE("delta invariant under rigid motions (sampling tolerance)") {
  BallDomain<2> disk;
  auto base = measure_flatness<2>(disk, Vec<2>(1, 0), 0.25);
  Philox rng(5, 0);
  double a = rng.uniform(0, 2 * M_PI);
  Mat<2> rot = rotation_from_angles<2>({a, 0, 0});
  Vec<2> shift(0.7, -0.3);
  BallDomain<2> moved{Ball<2>{shift, 1.0}};
  Vec<2> x = rot * Vec<2>(1, 0) + shift - rot * Vec<2>(0, 0);
  auto rep = measure_flatness<2>(moved, shift + rot * (Vec<2>(1, 0)) - rot * Vec<2>(0, 0), 0.25);
  (void)x;
  CHECK(rep.delta == doctest::Approx(base.delta).epsilon(0.05));
}

TEST_CASE("delta is scale consistent") {
  BallDomain<2> small{Ball<2>{Vec<2>::Zero(), 1.0}};
  BallDomain<2> big{Ball<2>{Vec<2>::Zero(), 8.0}};
  auto r1 = measure_flatness<2>(small, Vec<2>(1, 0), 0.25);
  auto r2 = measure_flatness<2>(big, Vec<2>(8, 0), 2.0);
  CHECK(r1.delta == doctest::Approx(r2.delta).epsilon(1e-9));
}

TEST_CASE("certify_domain on the half-plane: flat within sampling tolerance") {
  HalfSpaceDomain<2> dom;
  CertifyOptions<2> opt;
  opt.r_max = 1.0;
  auto res = certify_domain<2>(dom, kInf, 40, opt);
  CHECK(res.delta_sup <= 1e-9);
  CHECK(res.separation_failures == 0);
  CHECK(res.probes == 40);
}

TEST_CASE("snowflake flatness scales with theta (Lemma 4.1 style probe)") {
  // Lemma 4.1 concerns the unbounded snowflake; probes stay on the graph
  // region away from the working-box walls.
  auto run = [&](double theta) {
    SnowflakeConfig<2> cfg;
    cfg.theta = theta;
    cfg.b = 0.05;
    cfg.freq = 4;
    cfg.depth = 3;
    cfg.bounded = false;
    cfg.subdiv = {1, 1.0};
    auto gens = build_snowflake<2>(cfg);
    MeshDomain<2> dom(gens.back().boundary());
    CertifyOptions<2> opt;
    opt.r_max = 0.5;
    opt.dyadic_levels = 5;
    opt.fail_fast = false;
    opt.restrict_region = true;
    opt.probe_region = Box<2>(Vec<2>(-2, -0.5), Vec<2>(2, 0.5));
    auto res = certify_domain<2>(dom, kInf, 60, opt);
    return res.delta_sup;
  };
  double d1 = run(0.05);
  double d2 = run(0.1);
  // delta_sup / theta stable across theta (within 25%)
  double ratio = (d2 / 0.1) / (d1 / 0.05);
  CHECK(ratio > 0.75);
  CHECK(ratio < 1.25);
  // and consistent with (c1 theta)-flatness with a moderate constant
  CHECK(d2 / 0.1 < 3.0);
}

TEST_CASE("orientation error on a thin slab probed beyond its width") {
  // both sides of the fitted plane leave the domain at 3/4 r
  BoundaryMesh<2> m;
  m.add_face({Vec<2>(-4, 0), Vec<2>(4, 0)}, Vec<2>(0, -1));
  m.add_face({Vec<2>(4, 0), Vec<2>(4, 0.1)}, Vec<2>(1, 0));
  m.add_face({Vec<2>(4, 0.1), Vec<2>(-4, 0.1)}, Vec<2>(0, 1));
  m.add_face({Vec<2>(-4, 0.1), Vec<2>(-4, 0)}, Vec<2>(-1, 0));
  MeshDomain<2> slab(std::move(m));
  CHECK_THROWS_AS(measure_flatness<2>(slab, Vec<2>(0, 0), 1.0), OrientationError);
}
